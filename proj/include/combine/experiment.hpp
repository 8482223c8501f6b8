#ifndef COMBINE_EXPERIMENT_HPP
#define COMBINE_EXPERIMENT_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "combine/orchestrator.hpp"
#include "combine/stream.hpp"

namespace combine {

/// One simulated user: group label plus walk and corruption parameters.
struct SimUserSpec {
    std::string group = "default";
    double step_size = 0.1;
    double corruption_prob = 0.0;
};

struct SimulationSpec {
    int num_actions = 5;
    long horizon = 2500;
    double walk_up_prob = 0.5;
    std::vector<SimUserSpec> users;
    std::vector<double> partition;  // empty -> uniform
    bool emit_env_trace = false;
};

struct StreamReplaySpec {
    std::string path;
    StreamSchema schema;
    CorruptionMode corruption;
    long horizon = 0;     // 0 -> longest replay the streams allow
    long offset_max = 0;  // random start offsets drawn from [0, offset_max)
};

enum class AlgorithmKind { Combine, UcbStationary, UcbDiscounted, LinUcb, LinTs };

struct AlgorithmSpec {
    std::string name;
    AlgorithmKind kind = AlgorithmKind::Combine;
    VariantConfig cfg;
};

/// Named presets: UCBBanditS, UCBBanditNS, LinUCB, LinTS,
/// LinUCB+UCBBanditNS, LinTS+UCBBanditNS, COMBINE-UCB, COMBINE-UCB-common,
/// COMBINE-softmax, COMBINE-softmax-common.
AlgorithmSpec make_algorithm(const std::string& name);

struct SweepSpec {
    std::string parameter;  // algorithm or environment parameter name
    std::vector<double> values;
};

struct ExperimentSpec {
    std::variant<SimulationSpec, StreamReplaySpec> environment;
    std::vector<AlgorithmSpec> algorithms;
    std::vector<uint64_t> seeds{1};
    int replications = 1;
    int workers = 1;
    std::optional<SweepSpec> sweep;
};

struct EnvTraceRow {
    int user;
    long t;
    double hidden;
    int best_action;
    bool corrupted;
};

/// Full record of one (algorithm, seed, replication) run.
struct RunTrace {
    std::string algorithm;
    uint64_t seed = 0;
    int replication = 0;
    std::vector<double> cum_regret;   // summed over users, length horizon
    std::vector<double> pb_cb_mean;   // per-step mean referee probability
    std::vector<double> per_user_final_regret;
    std::vector<std::string> user_groups;
    std::vector<Eigen::MatrixXd> adjacency_by_user;  // combine variants only
    std::vector<EnvTraceRow> env_trace;              // when requested

    double final_regret() const {
        return cum_regret.empty() ? 0.0 : cum_regret.back();
    }
    /// Mean per-user final regret within one group.
    double group_regret(const std::string& group) const;
    /// Mean of the per-group regrets (macro average across groups).
    double total_regret() const;
    std::vector<std::string> groups() const;
};

/// Cumulative sum of (oracle - agent) rewards.
std::vector<double> dynamic_regret(const std::vector<double>& agent_rewards,
                                   const std::vector<double>& oracle_rewards);

/// Runs every (algorithm, seed, replication) combination; deterministic
/// output order regardless of worker count.
std::vector<RunTrace> run_experiment(const ExperimentSpec& spec);

struct SweepRow {
    double value;
    std::string algorithm;
    double mean_regret;
    double std_regret;
};

/// Grid sweep over spec.sweep; each grid point is a full run_experiment.
std::vector<SweepRow> run_sweep(const ExperimentSpec& spec);

/// Writes regret_curves.csv, referee_trace.csv, summary.csv and adjacency
/// dumps for the first run of each combine variant.
void emit_outputs(const std::vector<RunTrace>& traces,
                  const std::string& out_dir);

void emit_sweep_csv(const std::vector<SweepRow>& rows,
                    const std::string& out_dir);

/// Loads an experiment spec from a JSON file (schema in the README).
ExperimentSpec parse_experiment_spec(const std::string& path);

}  // namespace combine

#endif
