// Command-line front end: batch experiments, stream replay, parameter
// sweeps and referee-dynamics analysis, all emitting CSV for plotting.
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "combine/dynamics.hpp"
#include "combine/experiment.hpp"

namespace {

combine::ExperimentSpec load_spec(const std::string& path,
                                  const std::vector<uint64_t>& seeds,
                                  int workers) {
    combine::ExperimentSpec spec = combine::parse_experiment_spec(path);
    if (!seeds.empty()) spec.seeds = seeds;
    if (workers > 0) spec.workers = workers;
    return spec;
}

int run_batch(const std::string& spec_path, const std::string& out_dir,
              const std::vector<uint64_t>& seeds, int workers,
              bool expect_stream) {
    combine::ExperimentSpec spec = load_spec(spec_path, seeds, workers);
    const bool is_stream =
        std::holds_alternative<combine::StreamReplaySpec>(spec.environment);
    if (is_stream != expect_stream) {
        std::cerr << (expect_stream
                          ? "replay requires environment.type = \"stream\"\n"
                          : "simulate requires environment.type = "
                            "\"simulation\"\n");
        return 2;
    }
    const auto traces = combine::run_experiment(spec);
    combine::emit_outputs(traces, out_dir);
    std::cout << "wrote " << traces.size() << " runs to " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"combine: bandit arbitration experiments"};
    app.require_subcommand(1);

    std::string spec_path;
    std::string out_dir = "out";
    std::vector<uint64_t> seeds;
    int workers = 0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--spec", spec_path, "experiment spec (JSON)")
            ->required();
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--seeds", seeds, "override the spec's seed list");
        cmd->add_option("--workers", workers, "override the worker count");
    };

    CLI::App* simulate =
        app.add_subcommand("simulate", "run the random-walk simulation");
    add_common(simulate);
    CLI::App* replay =
        app.add_subcommand("replay", "replay a labeled CSV stream");
    add_common(replay);
    CLI::App* sweep =
        app.add_subcommand("sweep", "grid sweep over one parameter");
    add_common(sweep);

    CLI::App* dynamics = app.add_subcommand(
        "dynamics", "referee mean-field dynamics vs simulation");
    double delta_r = 0.05, r_star = 1.0, gap = 0.5, p0 = 0.5;
    double t_end = 2000.0, dt = 0.1;
    long horizon = 2000;
    int replications = 2000;
    uint64_t dyn_seed = 1;
    std::string dyn_out = "dynamics.csv";
    dynamics->add_option("--delta-r", delta_r, "referee step size");
    dynamics->add_option("--r-star", r_star, "superior policy mean reward");
    dynamics->add_option("--gap", gap, "reward gap between the policies");
    dynamics->add_option("--p0", p0, "initial probability");
    dynamics->add_option("--t-end", t_end, "integration horizon");
    dynamics->add_option("--dt", dt, "integration step");
    dynamics->add_option("--horizon", horizon, "simulation steps");
    dynamics->add_option("--replications", replications,
                         "simulation replications");
    dynamics->add_option("--seed", dyn_seed, "simulation seed");
    dynamics->add_option("--out", dyn_out, "output CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            return run_batch(spec_path, out_dir, seeds, workers, false);
        }
        if (replay->parsed()) {
            return run_batch(spec_path, out_dir, seeds, workers, true);
        }
        if (sweep->parsed()) {
            combine::ExperimentSpec spec = load_spec(spec_path, seeds, workers);
            if (!spec.sweep) {
                std::cerr << "sweep requires a \"sweep\" block in the spec\n";
                return 2;
            }
            const auto rows = combine::run_sweep(spec);
            combine::emit_sweep_csv(rows, out_dir);
            std::cout << "wrote " << rows.size() << " sweep rows to " << out_dir
                      << "\n";
            return 0;
        }
        // dynamics
        combine::DynamicsParams params{delta_r, r_star, gap, p0};
        const auto theory = combine::integrate_dynamics(params, t_end, dt);
        combine::Rng rng(dyn_seed);
        const auto empirical =
            combine::monte_carlo_two_policy(params, horizon, replications, rng);
        const double c_inf = combine::c_infinity(params);

        std::filesystem::path out_path(dyn_out);
        if (out_path.has_parent_path()) {
            std::filesystem::create_directories(out_path.parent_path());
        }
        std::ofstream out(dyn_out);
        if (!out) {
            std::cerr << "cannot write " << dyn_out << "\n";
            return 2;
        }
        out << "t,p_theory,p_empirical,c_infinity\n";
        const size_t rows = std::max(theory.size(), empirical.size());
        for (size_t i = 0; i < rows; ++i) {
            out << (i < theory.size() ? std::to_string(theory[i].first)
                                      : std::to_string(i)) << ',';
            if (i < theory.size()) out << theory[i].second;
            out << ',';
            if (i < empirical.size()) out << empirical[i];
            out << ',' << c_inf << '\n';
        }
        std::cout << "c_infinity = " << c_inf << "; wrote " << dyn_out << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
