#include "combine/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "combine/sim_env.hpp"

namespace combine {

namespace {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Agents
// ---------------------------------------------------------------------------

class Agent {
public:
    virtual ~Agent() = default;
    virtual int select(int user, const Eigen::VectorXd& ctx, long t, Rng& rng) = 0;
    virtual void update(int user, const Eigen::VectorXd& ctx, int action,
                        double reward, long t) = 0;
    virtual void end_round() {}
    /// Referee probability of the CB at the last selection; NaN when the
    /// algorithm has no referee.
    virtual double pb_cb(int user) const {
        (void)user;
        return std::numeric_limits<double>::quiet_NaN();
    }
    virtual std::vector<Eigen::MatrixXd> adjacency_dump() const { return {}; }
};

class CombineAgent : public Agent {
public:
    CombineAgent(const VariantConfig& cfg, int num_users, int num_actions,
                 int context_dim)
        : cfg_(cfg),
          shared_(num_actions, context_dim),
          pending_(static_cast<size_t>(num_users)) {
        users_.reserve(static_cast<size_t>(num_users));
        for (int u = 0; u < num_users; ++u) {
            users_.emplace_back(num_actions, cfg_);
        }
        refresh_pooled(users_, shared_, cfg_);
    }

    int select(int user, const Eigen::VectorXd& ctx, long t, Rng& rng) override {
        auto& slot = pending_[static_cast<size_t>(user)];
        slot = combine_select(users_[static_cast<size_t>(user)], shared_, ctx,
                              t, cfg_, rng);
        return slot->action;
    }

    void update(int user, const Eigen::VectorXd& ctx, int action, double reward,
                long t) override {
        auto& slot = pending_[static_cast<size_t>(user)];
        if (!slot || slot->action != action) {
            throw std::logic_error("CombineAgent: update without matching select");
        }
        combine_update(users_[static_cast<size_t>(user)], shared_, *slot, ctx,
                       reward, t, cfg_);
        last_pb_cb_[static_cast<size_t>(user)] =
            slot->chosen == PolicyChoice::ContextualBandit
                ? slot->pb_at_selection
                : 1.0 - slot->pb_at_selection;
        slot.reset();
    }

    void end_round() override { refresh_pooled(users_, shared_, cfg_); }

    double pb_cb(int user) const override {
        auto it = last_pb_cb_.find(static_cast<size_t>(user));
        return it == last_pb_cb_.end() ? 0.5 : it->second;
    }

    std::vector<Eigen::MatrixXd> adjacency_dump() const override {
        std::vector<Eigen::MatrixXd> out;
        out.reserve(users_.size());
        for (const auto& u : users_) {
            out.push_back(u.preference ? u.preference->prefs
                                       : u.adjacency.counts);
        }
        return out;
    }

    const std::vector<UserAgentState>& users() const { return users_; }

private:
    VariantConfig cfg_;
    std::vector<UserAgentState> users_;
    SharedAgentState shared_;
    std::vector<std::optional<SelectResult>> pending_;
    std::map<size_t, double> last_pb_cb_;
};

/// Per-user UCB1, stationary (sample average) or discounted mean.
class UcbBaselineAgent : public Agent {
public:
    UcbBaselineAgent(bool discounted, double alpha_b, double gamma,
                     int num_users, int num_actions)
        : discounted_(discounted),
          alpha_b_(alpha_b),
          gamma_(gamma),
          arms_(static_cast<size_t>(num_users),
                std::vector<MabArmState>(static_cast<size_t>(num_actions))),
          all_actions_(static_cast<size_t>(num_actions)) {
        std::iota(all_actions_.begin(), all_actions_.end(), 0);
    }

    int select(int user, const Eigen::VectorXd&, long t, Rng&) override {
        return mab_select(arms_[static_cast<size_t>(user)], all_actions_, t,
                          alpha_b_);
    }

    void update(int user, const Eigen::VectorXd&, int action, double reward,
                long) override {
        MabArmState& arm =
            arms_[static_cast<size_t>(user)][static_cast<size_t>(action)];
        arm.play_count += 1;
        arm.mean_reward =
            discounted_
                ? discounted_mean_update(arm.mean_reward, reward, gamma_)
                : sample_average_update(arm.mean_reward, reward, arm.play_count);
    }

private:
    bool discounted_;
    double alpha_b_;
    double gamma_;
    std::vector<std::vector<MabArmState>> arms_;
    std::vector<int> all_actions_;
};

/// Global LinUCB / LinTS over all users.
class LinearBaselineAgent : public Agent {
public:
    LinearBaselineAgent(bool thompson, double alpha, double v, int num_actions,
                        int context_dim)
        : thompson_(thompson), alpha_(alpha), v_(v) {
        models_.reserve(static_cast<size_t>(num_actions));
        for (int a = 0; a < num_actions; ++a) {
            models_.emplace_back(context_dim);
        }
    }

    int select(int, const Eigen::VectorXd& ctx, long, Rng& rng) override {
        return thompson_ ? lints_select(ctx, models_, v_, rng)
                         : linucb_select(ctx, models_, alpha_);
    }

    void update(int, const Eigen::VectorXd& ctx, int action, double reward,
                long) override {
        linucb_update(models_[static_cast<size_t>(action)], ctx, reward);
    }

private:
    bool thompson_;
    double alpha_;
    double v_;
    std::vector<LinearArmModel> models_;
};

std::unique_ptr<Agent> make_agent(const AlgorithmSpec& alg, int num_users,
                                  int num_actions, int context_dim) {
    switch (alg.kind) {
        case AlgorithmKind::Combine:
            return std::make_unique<CombineAgent>(alg.cfg, num_users,
                                                  num_actions, context_dim);
        case AlgorithmKind::UcbStationary:
            return std::make_unique<UcbBaselineAgent>(
                false, alg.cfg.alpha_b, alg.cfg.gamma, num_users, num_actions);
        case AlgorithmKind::UcbDiscounted:
            return std::make_unique<UcbBaselineAgent>(
                true, alg.cfg.alpha_b, alg.cfg.gamma, num_users, num_actions);
        case AlgorithmKind::LinUcb:
            return std::make_unique<LinearBaselineAgent>(
                false, alg.cfg.alpha, alg.cfg.v, num_actions, context_dim);
        case AlgorithmKind::LinTs:
            return std::make_unique<LinearBaselineAgent>(
                true, alg.cfg.alpha, alg.cfg.v, num_actions, context_dim);
    }
    throw std::logic_error("make_agent: unknown algorithm kind");
}

Rng make_rng(std::initializer_list<uint64_t> words) {
    std::seed_seq seq(words.begin(), words.end());
    return Rng(seq);
}

// ---------------------------------------------------------------------------
// Runners
// ---------------------------------------------------------------------------

RunTrace run_simulation(const SimulationSpec& env, const AlgorithmSpec& alg,
                        uint64_t seed, int replication) {
    const int num_users = static_cast<int>(env.users.size());
    const int k = env.num_actions;

    RunTrace trace;
    trace.algorithm = alg.name;
    trace.seed = seed;
    trace.replication = replication;
    trace.per_user_final_regret.assign(static_cast<size_t>(num_users), 0.0);
    for (const auto& u : env.users) trace.user_groups.push_back(u.group);

    std::vector<EnvConfig> env_cfgs;
    std::vector<EnvState> states;
    std::vector<Rng> env_rngs;
    for (int u = 0; u < num_users; ++u) {
        EnvConfig cfg;
        cfg.num_actions = k;
        cfg.step_size = env.users[static_cast<size_t>(u)].step_size;
        cfg.corruption_prob = env.users[static_cast<size_t>(u)].corruption_prob;
        cfg.walk_up_prob = env.walk_up_prob;
        cfg.horizon = env.horizon;
        cfg.partition = env.partition;
        env_cfgs.push_back(cfg);
        // Environment streams do not depend on the algorithm, so different
        // algorithms at the same seed see identical worlds.
        env_rngs.push_back(make_rng({seed, static_cast<uint64_t>(replication),
                                     static_cast<uint64_t>(u), 0xE17ull}));
        EnvState s;
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        s.hidden = unit(env_rngs.back());
        states.push_back(s);
    }
    Rng agent_rng = make_rng({seed, static_cast<uint64_t>(replication),
                              0xA6E17ull});

    auto agent = make_agent(alg, num_users, k, k);
    const auto partition = env_cfgs.front().effective_partition();
    const bool has_referee = alg.kind == AlgorithmKind::Combine;

    trace.cum_regret.reserve(static_cast<size_t>(env.horizon));
    if (has_referee) trace.pb_cb_mean.reserve(static_cast<size_t>(env.horizon));

    double cum = 0.0;
    for (long t = 1; t <= env.horizon; ++t) {
        double pb_sum = 0.0;
        for (int u = 0; u < num_users; ++u) {
            const size_t ui = static_cast<size_t>(u);
            const Observation obs =
                observe_with_flag(states[ui], env_cfgs[ui], env_rngs[ui]);
            if (env.emit_env_trace) {
                trace.env_trace.push_back(
                    EnvTraceRow{u, t, states[ui].hidden,
                                best_action(states[ui].hidden, partition),
                                obs.corrupted});
            }
            const int action = agent->select(u, obs.context, t, agent_rng);
            const double r = reward(states[ui], action, partition);
            agent->update(u, obs.context, action, r, t);
            const double inst_regret = 1.0 - r;  // oracle always earns 1
            cum += inst_regret;
            trace.per_user_final_regret[ui] += inst_regret;
            if (has_referee) pb_sum += agent->pb_cb(u);
            states[ui] = advance(states[ui], env_cfgs[ui], env_rngs[ui]);
        }
        agent->end_round();
        trace.cum_regret.push_back(cum);
        if (has_referee) pb_sum /= num_users;
        if (has_referee) trace.pb_cb_mean.push_back(pb_sum);
    }
    trace.adjacency_by_user = agent->adjacency_dump();
    return trace;
}

RunTrace run_stream_replay(const StreamReplaySpec& env,
                           const AlgorithmSpec& alg, uint64_t seed,
                           int replication) {
    const auto streams = ingest(env.path, env.schema);
    if (streams.empty()) {
        throw std::runtime_error("run_stream_replay: no streams in " + env.path);
    }
    const int num_streams = static_cast<int>(streams.size());
    const int d = streams.front().dimension();
    int num_actions = 0;
    long min_len = std::numeric_limits<long>::max();
    for (const auto& s : streams) {
        if (s.dimension() != d) {
            throw std::runtime_error(
                "run_stream_replay: inconsistent feature dimensions");
        }
        for (int lab : s.labels) num_actions = std::max(num_actions, lab + 1);
        min_len = std::min(min_len, s.length());
    }
    const long horizon =
        env.horizon > 0 ? env.horizon : min_len - env.offset_max;

    Rng rng = make_rng({seed, static_cast<uint64_t>(replication), 0x57ull});
    std::vector<long> offsets(static_cast<size_t>(num_streams), 0);
    if (env.offset_max > 0) {
        std::uniform_int_distribution<long> pick(0, env.offset_max - 1);
        for (auto& off : offsets) off = pick(rng);
    }

    auto agent = make_agent(alg, num_streams, num_actions, d);
    const bool has_referee = alg.kind == AlgorithmKind::Combine;

    RunTrace trace;
    trace.algorithm = alg.name;
    trace.seed = seed;
    trace.replication = replication;
    trace.per_user_final_regret.assign(static_cast<size_t>(num_streams), 0.0);
    for (const auto& s : streams) {
        trace.user_groups.push_back(s.stream_id.empty() ? "stream"
                                                        : s.stream_id);
    }
    trace.cum_regret.assign(static_cast<size_t>(horizon), 0.0);
    if (has_referee) trace.pb_cb_mean.assign(static_cast<size_t>(horizon), 0.0);

    ReplayDriver driver;
    driver.select = [&](int stream, const Eigen::VectorXd& ctx, long t,
                        Rng& r) {
        return agent->select(stream, ctx, t + 1, r);
    };
    driver.update = [&](int stream, const Eigen::VectorXd& ctx, int action,
                        double rew, long t) {
        agent->update(stream, ctx, action, rew, t + 1);
        trace.per_user_final_regret[static_cast<size_t>(stream)] += 1.0 - rew;
        trace.cum_regret[static_cast<size_t>(t)] += 1.0 - rew;
        if (has_referee) {
            trace.pb_cb_mean[static_cast<size_t>(t)] +=
                agent->pb_cb(stream) / num_streams;
        }
    };
    driver.end_round = [&]() { agent->end_round(); };

    bandit_replay(streams, env.corruption, driver, offsets, horizon, rng);

    // Instantaneous counts -> cumulative.
    for (size_t t = 1; t < trace.cum_regret.size(); ++t) {
        trace.cum_regret[t] += trace.cum_regret[t - 1];
    }
    trace.adjacency_by_user = agent->adjacency_dump();
    return trace;
}

RunTrace run_one(const ExperimentSpec& spec, const AlgorithmSpec& alg,
                 uint64_t seed, int replication) {
    if (std::holds_alternative<SimulationSpec>(spec.environment)) {
        return run_simulation(std::get<SimulationSpec>(spec.environment), alg,
                              seed, replication);
    }
    return run_stream_replay(std::get<StreamReplaySpec>(spec.environment), alg,
                             seed, replication);
}

void validate_spec(const ExperimentSpec& spec) {
    if (spec.algorithms.empty()) {
        throw std::invalid_argument("experiment spec: no algorithms");
    }
    if (spec.seeds.empty()) {
        throw std::invalid_argument("experiment spec: no seeds");
    }
    if (spec.replications < 1) {
        throw std::invalid_argument("experiment spec: replications >= 1");
    }
    if (std::holds_alternative<SimulationSpec>(spec.environment)) {
        const auto& env = std::get<SimulationSpec>(spec.environment);
        if (env.users.empty()) {
            throw std::invalid_argument("experiment spec: no users");
        }
        if (env.num_actions < 1 || env.horizon < 1) {
            throw std::invalid_argument(
                "experiment spec: invalid actions/horizon");
        }
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Public surface
// ---------------------------------------------------------------------------

double RunTrace::group_regret(const std::string& group) const {
    double sum = 0.0;
    int count = 0;
    for (size_t u = 0; u < user_groups.size(); ++u) {
        if (user_groups[u] == group) {
            sum += per_user_final_regret[u];
            ++count;
        }
    }
    if (count == 0) {
        throw std::invalid_argument("group_regret: unknown group " + group);
    }
    return sum / count;
}

std::vector<std::string> RunTrace::groups() const {
    std::vector<std::string> out;
    for (const auto& g : user_groups) {
        if (std::find(out.begin(), out.end(), g) == out.end()) {
            out.push_back(g);
        }
    }
    return out;
}

double RunTrace::total_regret() const {
    const auto gs = groups();
    double sum = 0.0;
    for (const auto& g : gs) sum += group_regret(g);
    return sum / static_cast<double>(gs.size());
}

std::vector<double> dynamic_regret(const std::vector<double>& agent_rewards,
                                   const std::vector<double>& oracle_rewards) {
    if (agent_rewards.size() != oracle_rewards.size()) {
        throw std::invalid_argument("dynamic_regret: length mismatch");
    }
    std::vector<double> cum(agent_rewards.size());
    double acc = 0.0;
    for (size_t t = 0; t < agent_rewards.size(); ++t) {
        acc += oracle_rewards[t] - agent_rewards[t];
        cum[t] = acc;
    }
    return cum;
}

AlgorithmSpec make_algorithm(const std::string& name) {
    std::string key = name;
    std::replace(key.begin(), key.end(), ' ', '-');

    AlgorithmSpec alg;
    alg.name = name;
    if (key == "UCBBanditS") {
        alg.kind = AlgorithmKind::UcbStationary;
    } else if (key == "UCBBanditNS") {
        alg.kind = AlgorithmKind::UcbDiscounted;
    } else if (key == "LinUCB") {
        alg.kind = AlgorithmKind::LinUcb;
    } else if (key == "LinTS") {
        alg.kind = AlgorithmKind::LinTs;
    } else if (key == "LinUCB+UCBBanditNS" || key == "LinTS+UCBBanditNS") {
        alg.kind = AlgorithmKind::Combine;
        alg.cfg.cb_kind =
            key == "LinTS+UCBBanditNS" ? CbKind::LinTs : CbKind::LinUcb;
        alg.cfg.mab_kind = MabKind::DiscountedUcb;
        alg.cfg.use_reach = false;
    } else if (key == "COMBINE-UCB" || key == "COMBINE-UCB-common") {
        alg.kind = AlgorithmKind::Combine;
        alg.cfg.mab_kind = MabKind::DiscountedUcb;
        alg.cfg.pooling = key == "COMBINE-UCB-common" ? Pooling::Common
                                                      : Pooling::PerUser;
    } else if (key == "COMBINE-softmax" || key == "COMBINE-softmax-common") {
        alg.kind = AlgorithmKind::Combine;
        alg.cfg.mab_kind = MabKind::SoftmaxTransition;
        alg.cfg.pooling = key == "COMBINE-softmax-common" ? Pooling::Common
                                                          : Pooling::PerUser;
    } else {
        throw std::invalid_argument("make_algorithm: unknown algorithm '" +
                                    name + "'");
    }
    return alg;
}

std::vector<RunTrace> run_experiment(const ExperimentSpec& spec) {
    validate_spec(spec);

    struct Job {
        const AlgorithmSpec* alg;
        uint64_t seed;
        int replication;
    };
    std::vector<Job> jobs;
    for (const auto& alg : spec.algorithms) {
        for (uint64_t seed : spec.seeds) {
            for (int rep = 0; rep < spec.replications; ++rep) {
                jobs.push_back(Job{&alg, seed, rep});
            }
        }
    }

    std::vector<RunTrace> traces(jobs.size());
    const int workers =
        std::max(1, std::min<int>(spec.workers, static_cast<int>(jobs.size())));
    if (workers == 1) {
        for (size_t i = 0; i < jobs.size(); ++i) {
            traces[i] = run_one(spec, *jobs[i].alg, jobs[i].seed,
                                jobs[i].replication);
        }
        return traces;
    }

    std::atomic<size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            try {
                traces[i] = run_one(spec, *jobs[i].alg, jobs[i].seed,
                                    jobs[i].replication);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
    return traces;
}

namespace {

void apply_sweep_value(ExperimentSpec& spec, const std::string& parameter,
                       double value) {
    const std::set<std::string> algo_params{"alpha",   "alpha_b", "gamma",
                                            "delta_r", "alpha_s", "v"};
    if (algo_params.count(parameter)) {
        for (auto& alg : spec.algorithms) {
            if (parameter == "alpha") alg.cfg.alpha = value;
            else if (parameter == "alpha_b") alg.cfg.alpha_b = value;
            else if (parameter == "gamma") alg.cfg.gamma = value;
            else if (parameter == "delta_r") alg.cfg.delta_r = value;
            else if (parameter == "alpha_s") alg.cfg.alpha_s = value;
            else alg.cfg.v = value;
        }
        return;
    }
    if (parameter == "corruption_prob") {
        if (std::holds_alternative<SimulationSpec>(spec.environment)) {
            for (auto& u : std::get<SimulationSpec>(spec.environment).users) {
                u.corruption_prob = value;
            }
        } else {
            std::get<StreamReplaySpec>(spec.environment).corruption.prob =
                value;
        }
        return;
    }
    if (parameter == "step_size" || parameter == "instability") {
        if (!std::holds_alternative<SimulationSpec>(spec.environment)) {
            throw std::invalid_argument("sweep: " + parameter +
                                        " requires a simulation environment");
        }
        // instability in [0,1] maps linearly onto walk step c in [0, 0.5].
        const double c = parameter == "instability" ? 0.5 * value : value;
        for (auto& u : std::get<SimulationSpec>(spec.environment).users) {
            u.step_size = c;
        }
        return;
    }
    throw std::invalid_argument("sweep: unknown parameter '" + parameter + "'");
}

}  // namespace

std::vector<SweepRow> run_sweep(const ExperimentSpec& spec) {
    if (!spec.sweep || spec.sweep->values.empty()) {
        throw std::invalid_argument("run_sweep: empty sweep grid");
    }
    std::vector<SweepRow> rows;
    for (double value : spec.sweep->values) {
        ExperimentSpec point = spec;
        apply_sweep_value(point, spec.sweep->parameter, value);
        const auto traces = run_experiment(point);
        for (const auto& alg : spec.algorithms) {
            std::vector<double> finals;
            for (const auto& tr : traces) {
                if (tr.algorithm == alg.name) {
                    finals.push_back(tr.total_regret());
                }
            }
            const double mean =
                std::accumulate(finals.begin(), finals.end(), 0.0) /
                static_cast<double>(finals.size());
            double var = 0.0;
            for (double f : finals) var += (f - mean) * (f - mean);
            var /= static_cast<double>(finals.size());
            rows.push_back(SweepRow{value, alg.name, mean, std::sqrt(var)});
        }
    }
    return rows;
}

void emit_outputs(const std::vector<RunTrace>& traces,
                  const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    std::ofstream regret(fs::path(out_dir) / "regret_curves.csv");
    regret << "run_id,algorithm,seed,t,cum_regret\n";
    std::ofstream referee(fs::path(out_dir) / "referee_trace.csv");
    referee << "run_id,algorithm,seed,t,pb_cb\n";
    if (!regret || !referee) {
        throw std::runtime_error("emit_outputs: cannot write to " + out_dir);
    }
    for (size_t i = 0; i < traces.size(); ++i) {
        const RunTrace& tr = traces[i];
        for (size_t t = 0; t < tr.cum_regret.size(); ++t) {
            regret << i << ',' << tr.algorithm << ',' << tr.seed << ','
                   << (t + 1) << ',' << tr.cum_regret[t] << '\n';
        }
        for (size_t t = 0; t < tr.pb_cb_mean.size(); ++t) {
            referee << i << ',' << tr.algorithm << ',' << tr.seed << ','
                    << (t + 1) << ',' << tr.pb_cb_mean[t] << '\n';
        }
    }

    // summary.csv: per-group and macro-total mean +- std across runs.
    std::ofstream summary(fs::path(out_dir) / "summary.csv");
    summary << "algorithm,group,mean,std\n";
    std::vector<std::string> algorithms;
    for (const auto& tr : traces) {
        if (std::find(algorithms.begin(), algorithms.end(), tr.algorithm) ==
            algorithms.end()) {
            algorithms.push_back(tr.algorithm);
        }
    }
    for (const auto& alg : algorithms) {
        std::vector<const RunTrace*> runs;
        for (const auto& tr : traces) {
            if (tr.algorithm == alg) runs.push_back(&tr);
        }
        std::vector<std::string> groups = runs.front()->groups();
        groups.push_back("total");
        for (const auto& g : groups) {
            std::vector<double> vals;
            for (const RunTrace* tr : runs) {
                vals.push_back(g == "total" ? tr->total_regret()
                                            : tr->group_regret(g));
            }
            const double mean =
                std::accumulate(vals.begin(), vals.end(), 0.0) /
                static_cast<double>(vals.size());
            double var = 0.0;
            for (double v : vals) var += (v - mean) * (v - mean);
            var /= static_cast<double>(vals.size());
            summary << alg << ',' << g << ',' << mean << ',' << std::sqrt(var)
                    << '\n';
        }
    }

    // Transition-matrix dumps for the first run of each combine variant.
    std::set<std::string> dumped;
    for (const auto& tr : traces) {
        if (tr.adjacency_by_user.empty() || dumped.count(tr.algorithm)) {
            continue;
        }
        dumped.insert(tr.algorithm);
        std::string tag = tr.algorithm;
        std::replace(tag.begin(), tag.end(), '+', '_');
        std::replace(tag.begin(), tag.end(), ' ', '_');
        for (size_t u = 0; u < tr.adjacency_by_user.size(); ++u) {
            std::ofstream out(fs::path(out_dir) /
                              ("adjacency_" + tag + "_user" +
                               std::to_string(u) + ".csv"));
            write_matrix_csv(out, tr.adjacency_by_user[u]);
        }
    }

    // Environment traces, when the spec requested them.
    bool any_env_trace = false;
    for (const auto& tr : traces) {
        if (!tr.env_trace.empty()) {
            any_env_trace = true;
            break;
        }
    }
    if (any_env_trace) {
        std::ofstream env(fs::path(out_dir) / "env_trace.csv");
        env << "run_id,algorithm,seed,user,t,s,best_action,corrupted\n";
        for (size_t i = 0; i < traces.size(); ++i) {
            for (const auto& row : traces[i].env_trace) {
                env << i << ',' << traces[i].algorithm << ',' << traces[i].seed
                    << ',' << row.user << ',' << row.t << ',' << row.hidden
                    << ',' << row.best_action << ',' << (row.corrupted ? 1 : 0)
                    << '\n';
            }
        }
    }
}

void emit_sweep_csv(const std::vector<SweepRow>& rows,
                    const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::ofstream out(fs::path(out_dir) / "sweep.csv");
    out << "value,algorithm,mean_regret,std_regret\n";
    for (const auto& row : rows) {
        out << row.value << ',' << row.algorithm << ',' << row.mean_regret
            << ',' << row.std_regret << '\n';
    }
}

namespace {

AlgorithmSpec parse_algorithm(const json& j) {
    if (j.is_string()) {
        return make_algorithm(j.get<std::string>());
    }
    AlgorithmSpec alg = make_algorithm(j.at("name").get<std::string>());
    if (j.contains("params")) {
        const json& p = j.at("params");
        if (p.contains("alpha")) alg.cfg.alpha = p["alpha"].get<double>();
        if (p.contains("alpha_b")) alg.cfg.alpha_b = p["alpha_b"].get<double>();
        if (p.contains("gamma")) alg.cfg.gamma = p["gamma"].get<double>();
        if (p.contains("delta_r")) alg.cfg.delta_r = p["delta_r"].get<double>();
        if (p.contains("alpha_s")) alg.cfg.alpha_s = p["alpha_s"].get<double>();
        if (p.contains("v")) alg.cfg.v = p["v"].get<double>();
    }
    return alg;
}

CorruptionMode parse_corruption(const json& j) {
    CorruptionMode mode;
    const std::string kind = j.value("kind", "uniform_box");
    if (kind == "uniform_box") {
        mode.kind = CorruptionKind::UniformBox;
    } else if (kind == "random_one_hot") {
        mode.kind = CorruptionKind::RandomOneHot;
    } else if (kind == "mixed") {
        mode.kind = CorruptionKind::Mixed;
    } else {
        throw std::invalid_argument("spec: unknown corruption kind '" + kind +
                                    "'");
    }
    mode.prob = j.value("prob", 0.0);
    if (j.contains("binary_dims")) {
        mode.binary_dims = j["binary_dims"].get<std::vector<int>>();
    }
    return mode;
}

std::vector<std::string> detect_feature_columns(const std::string& path,
                                                const std::string& label,
                                                const std::string& stream_id) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("spec: cannot open stream file " + path);
    }
    std::string header;
    std::getline(in, header);
    std::vector<std::string> out;
    std::stringstream ss(header);
    std::string col;
    while (std::getline(ss, col, ',')) {
        while (!col.empty() && (col.back() == '\r' || col.back() == ' ')) {
            col.pop_back();
        }
        if (col != label && col != stream_id) out.push_back(col);
    }
    return out;
}

}  // namespace

ExperimentSpec parse_experiment_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("spec: cannot open " + path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("spec: JSON parse error in " + path + ": " +
                                 e.what());
    }

    ExperimentSpec spec;
    const json& env = j.at("environment");
    const std::string type = env.at("type").get<std::string>();
    if (type == "simulation") {
        SimulationSpec sim;
        sim.num_actions = env.value("num_actions", 5);
        sim.horizon = env.value("horizon", 2500L);
        sim.walk_up_prob = env.value("walk_up_prob", 0.5);
        sim.emit_env_trace = env.value("env_trace", false);
        if (env.contains("partition")) {
            sim.partition = env["partition"].get<std::vector<double>>();
        }
        if (env.contains("groups")) {
            for (const auto& g : env["groups"]) {
                SimUserSpec u;
                u.group = g.value("name", "default");
                u.step_size = g.value("step_size", 0.1);
                u.corruption_prob = g.value("corruption_prob", 0.0);
                const int count = g.value("users", 1);
                for (int i = 0; i < count; ++i) sim.users.push_back(u);
            }
        }
        if (env.contains("users")) {
            for (const auto& g : env["users"]) {
                SimUserSpec u;
                u.group = g.value("group", "default");
                u.step_size = g.value("step_size", 0.1);
                u.corruption_prob = g.value("corruption_prob", 0.0);
                sim.users.push_back(u);
            }
        }
        spec.environment = sim;
    } else if (type == "stream") {
        StreamReplaySpec st;
        st.path = env.at("path").get<std::string>();
        st.schema.label_column = env.value("label_column", "label");
        st.schema.stream_id_column = env.value("stream_id_column", "");
        if (env.contains("features")) {
            st.schema.feature_columns =
                env["features"].get<std::vector<std::string>>();
        } else {
            st.schema.feature_columns = detect_feature_columns(
                st.path, st.schema.label_column, st.schema.stream_id_column);
        }
        if (env.contains("corruption")) {
            st.corruption = parse_corruption(env["corruption"]);
        }
        st.horizon = env.value("horizon", 0L);
        st.offset_max = env.value("offset_max", 0L);
        spec.environment = st;
    } else {
        throw std::invalid_argument("spec: unknown environment type '" + type +
                                    "'");
    }

    for (const auto& a : j.at("algorithms")) {
        spec.algorithms.push_back(parse_algorithm(a));
    }
    if (j.contains("seeds")) {
        spec.seeds = j["seeds"].get<std::vector<uint64_t>>();
    }
    spec.replications = j.value("replications", 1);
    spec.workers = j.value("workers", 1);
    if (j.contains("sweep")) {
        SweepSpec sw;
        sw.parameter = j["sweep"].at("parameter").get<std::string>();
        sw.values = j["sweep"].at("values").get<std::vector<double>>();
        spec.sweep = sw;
    }
    validate_spec(spec);
    return spec;
}

}  // namespace combine
