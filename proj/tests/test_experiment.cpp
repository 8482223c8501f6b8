#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "combine/experiment.hpp"

using namespace combine;

namespace {

SimulationSpec small_sim(int k, long horizon, int users_per_group) {
    SimulationSpec sim;
    sim.num_actions = k;
    sim.horizon = horizon;
    for (int u = 0; u < users_per_group; ++u) {
        sim.users.push_back(SimUserSpec{"A", 0.2, 0.0});
        sim.users.push_back(SimUserSpec{"B", 0.01, 1.0});
    }
    return sim;
}

struct TempDir {
    std::string path;
    TempDir() {
        path = (std::filesystem::temp_directory_path() /
                ("combine_test_" + std::to_string(std::rand())))
                   .string();
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("dynamic_regret examples") {
    CHECK(dynamic_regret({1, 1, 1}, {1, 1, 1}) ==
          std::vector<double>({0, 0, 0}));
    CHECK(dynamic_regret({1, 0, 1, 0}, {1, 1, 1, 1}) ==
          std::vector<double>({0, 1, 1, 2}));
    CHECK_THROWS(dynamic_regret({1.0}, {1.0, 1.0}));
}

TEST_CASE("make_algorithm presets") {
    CHECK(make_algorithm("LinUCB").kind == AlgorithmKind::LinUcb);
    CHECK(make_algorithm("LinTS").kind == AlgorithmKind::LinTs);
    CHECK(make_algorithm("UCBBanditS").kind == AlgorithmKind::UcbStationary);
    CHECK(make_algorithm("UCBBanditNS").kind == AlgorithmKind::UcbDiscounted);
    const auto baseline = make_algorithm("LinUCB+UCBBanditNS");
    CHECK(baseline.kind == AlgorithmKind::Combine);
    CHECK_FALSE(baseline.cfg.use_reach);
    const auto softmax = make_algorithm("COMBINE-softmax-common");
    CHECK(softmax.cfg.mab_kind == MabKind::SoftmaxTransition);
    CHECK(softmax.cfg.pooling == Pooling::Common);
    const auto ucb = make_algorithm("COMBINE-UCB");
    CHECK(ucb.cfg.mab_kind == MabKind::DiscountedUcb);
    CHECK(ucb.cfg.use_reach);
    CHECK_THROWS(make_algorithm("nope"));
}

TEST_CASE("single-action simulation has zero regret") {
    ExperimentSpec spec;
    spec.environment = small_sim(1, 100, 1);
    spec.algorithms = {make_algorithm("COMBINE-softmax"),
                       make_algorithm("LinUCB")};
    const auto traces = run_experiment(spec);
    REQUIRE(traces.size() == 2);
    for (const auto& tr : traces) {
        CHECK(tr.final_regret() == doctest::Approx(0.0));
    }
}

TEST_CASE("identical specs give identical traces") {
    ExperimentSpec spec;
    spec.environment = small_sim(3, 150, 2);
    spec.algorithms = {make_algorithm("COMBINE-UCB")};
    spec.seeds = {7};
    const auto a = run_experiment(spec);
    const auto b = run_experiment(spec);
    REQUIRE(a.size() == b.size());
    CHECK(a[0].cum_regret == b[0].cum_regret);
    CHECK(a[0].per_user_final_regret == b[0].per_user_final_regret);
}

TEST_CASE("worker count does not change results") {
    ExperimentSpec spec;
    spec.environment = small_sim(3, 120, 2);
    spec.algorithms = {make_algorithm("COMBINE-softmax"),
                       make_algorithm("UCBBanditNS"),
                       make_algorithm("LinUCB")};
    spec.seeds = {1, 2};
    spec.workers = 1;
    const auto serial = run_experiment(spec);
    spec.workers = 4;
    const auto parallel = run_experiment(spec);
    REQUIRE(serial.size() == parallel.size());
    for (size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].algorithm == parallel[i].algorithm);
        CHECK(serial[i].cum_regret == parallel[i].cum_regret);
    }
}

TEST_CASE("seed isolation") {
    ExperimentSpec spec;
    spec.environment = small_sim(3, 100, 1);
    spec.algorithms = {make_algorithm("LinUCB")};
    spec.seeds = {1, 2};
    const auto both = run_experiment(spec);
    spec.seeds = {1};
    const auto only1 = run_experiment(spec);
    CHECK(both[0].cum_regret == only1[0].cum_regret);
}

TEST_CASE("cumulative regret is non-decreasing and groups decompose") {
    ExperimentSpec spec;
    spec.environment = small_sim(4, 200, 2);
    spec.algorithms = {make_algorithm("COMBINE-softmax")};
    const auto traces = run_experiment(spec);
    const auto& tr = traces[0];
    for (size_t t = 1; t < tr.cum_regret.size(); ++t) {
        CHECK(tr.cum_regret[t] >= tr.cum_regret[t - 1]);
    }
    double user_sum = 0.0;
    for (double r : tr.per_user_final_regret) user_sum += r;
    CHECK(user_sum == doctest::Approx(tr.final_regret()));
    CHECK(tr.groups() == std::vector<std::string>({"A", "B"}));
    CHECK(tr.total_regret() ==
          doctest::Approx(0.5 * (tr.group_regret("A") + tr.group_regret("B"))));
    CHECK_THROWS(tr.group_regret("C"));
}

TEST_CASE("emit_outputs writes stable CSV schemas") {
    ExperimentSpec spec;
    spec.environment = small_sim(3, 50, 1);
    spec.algorithms = {make_algorithm("COMBINE-softmax"),
                       make_algorithm("LinUCB")};
    const auto traces = run_experiment(spec);
    TempDir dir;
    emit_outputs(traces, dir.path);

    std::ifstream regret(std::filesystem::path(dir.path) /
                         "regret_curves.csv");
    REQUIRE(regret.good());
    std::string header;
    std::getline(regret, header);
    CHECK(header == "run_id,algorithm,seed,t,cum_regret");
    long rows = 0;
    std::string line;
    while (std::getline(regret, line)) ++rows;
    CHECK(rows == 100);  // 2 runs x 50 steps

    // Round trip the final cumulative regrets.
    std::ifstream again(std::filesystem::path(dir.path) / "regret_curves.csv");
    std::getline(again, line);
    std::vector<double> finals(2, 0.0);
    while (std::getline(again, line)) {
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        finals[static_cast<size_t>(std::stol(cells[0]))] =
            std::stod(cells[4]);
    }
    CHECK(finals[0] == doctest::Approx(traces[0].final_regret()));
    CHECK(finals[1] == doctest::Approx(traces[1].final_regret()));

    std::ifstream summary(std::filesystem::path(dir.path) / "summary.csv");
    REQUIRE(summary.good());
    std::getline(summary, header);
    CHECK(header == "algorithm,group,mean,std");
    rows = 0;
    while (std::getline(summary, line)) ++rows;
    CHECK(rows == 6);  // 2 algorithms x (A, B, total)

    CHECK(std::filesystem::exists(std::filesystem::path(dir.path) /
                                  "referee_trace.csv"));
    CHECK(std::filesystem::exists(
        std::filesystem::path(dir.path) /
        "adjacency_COMBINE-softmax_user0.csv"));
}

TEST_CASE("summary mean equals arithmetic mean of finals") {
    ExperimentSpec spec;
    spec.environment = small_sim(3, 60, 1);
    spec.algorithms = {make_algorithm("UCBBanditNS")};
    spec.seeds = {1, 2, 3};
    const auto traces = run_experiment(spec);
    double mean = 0.0;
    for (const auto& tr : traces) mean += tr.total_regret();
    mean /= traces.size();

    TempDir dir;
    emit_outputs(traces, dir.path);
    std::ifstream summary(std::filesystem::path(dir.path) / "summary.csv");
    std::string line;
    std::getline(summary, line);
    double total_mean = -1.0;
    while (std::getline(summary, line)) {
        if (line.find(",total,") != std::string::npos) {
            const auto a = line.find(",total,") + 7;
            const auto b = line.find(',', a);
            total_mean = std::stod(line.substr(a, b - a));
        }
    }
    CHECK(total_mean == doctest::Approx(mean).epsilon(1e-10));
}

TEST_CASE("sweep with a single grid point matches run_experiment") {
    ExperimentSpec spec;
    spec.environment = small_sim(3, 80, 1);
    spec.algorithms = {make_algorithm("LinUCB")};
    spec.seeds = {1, 2};
    spec.sweep = SweepSpec{"alpha", {1.0}};
    const auto rows = run_sweep(spec);
    REQUIRE(rows.size() == 1);
    const auto traces = run_experiment(spec);
    double mean = 0.0;
    for (const auto& tr : traces) mean += tr.total_regret();
    mean /= traces.size();
    CHECK(rows[0].mean_regret == doctest::Approx(mean));
    CHECK(rows[0].value == 1.0);

    spec.sweep = SweepSpec{"bogus", {1.0}};
    CHECK_THROWS(run_sweep(spec));
}

TEST_CASE("emit_outputs with no traces writes headers-only files") {
    TempDir dir;
    emit_outputs({}, dir.path);
    for (const std::string name :
         {"regret_curves.csv", "referee_trace.csv", "summary.csv"}) {
        std::ifstream in(std::filesystem::path(dir.path) / name);
        REQUIRE(in.good());
        std::string header, extra;
        CHECK(std::getline(in, header));
        CHECK_FALSE(header.empty());
        CHECK_FALSE(std::getline(in, extra));
    }
}

TEST_CASE("corruption sweep: LinUCB regret is non-decreasing in p") {
    ExperimentSpec spec;
    SimulationSpec sim;
    sim.num_actions = 3;
    sim.horizon = 400;
    for (int u = 0; u < 3; ++u) sim.users.push_back(SimUserSpec{"A", 0.2, 0.0});
    spec.environment = sim;
    spec.algorithms = {make_algorithm("LinUCB")};
    spec.seeds = {1, 2, 3, 4, 5};
    spec.workers = 4;
    spec.sweep = SweepSpec{"corruption_prob", {0.0, 0.25, 0.5, 0.75, 1.0}};
    const auto rows = run_sweep(spec);
    REQUIRE(rows.size() == 5);
    for (size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].mean_regret >= 0.95 * rows[i - 1].mean_regret);
    }
}

TEST_CASE("alpha_s sweep: a positive preference step beats a frozen matrix") {
    ExperimentSpec spec;
    SimulationSpec sim;
    sim.num_actions = 3;
    sim.horizon = 1000;
    for (int u = 0; u < 4; ++u) {
        sim.users.push_back(SimUserSpec{"B", 0.01, 1.0});
    }
    spec.environment = sim;
    spec.algorithms = {make_algorithm("COMBINE-softmax")};
    spec.seeds = {1, 2, 3, 4, 5};
    spec.workers = 4;
    spec.sweep = SweepSpec{"alpha_s", {0.0, 5.0, 10.0, 20.0}};
    const auto rows = run_sweep(spec);
    REQUIRE(rows.size() == 4);
    for (size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].mean_regret <= rows[0].mean_regret);
    }
}

TEST_CASE("parse_experiment_spec JSON round trip") {
    const std::string path =
        (std::filesystem::temp_directory_path() / "combine_spec_test.json")
            .string();
    {
        std::ofstream out(path);
        out << R"({
          "environment": {
            "type": "simulation",
            "num_actions": 4,
            "horizon": 300,
            "groups": [
              {"name": "A", "users": 3, "step_size": 0.2, "corruption_prob": 0.0},
              {"name": "B", "users": 2, "step_size": 0.01, "corruption_prob": 1.0}
            ]
          },
          "algorithms": ["LinUCB", {"name": "COMBINE-softmax", "params": {"alpha_s": 5.0}}],
          "seeds": [1, 2, 3],
          "workers": 2,
          "sweep": {"parameter": "corruption_prob", "values": [0.0, 1.0]}
        })";
    }
    const ExperimentSpec spec = parse_experiment_spec(path);
    std::remove(path.c_str());
    const auto& sim = std::get<SimulationSpec>(spec.environment);
    CHECK(sim.num_actions == 4);
    CHECK(sim.horizon == 300);
    CHECK(sim.users.size() == 5);
    CHECK(sim.users[3].group == "B");
    CHECK(sim.users[3].corruption_prob == 1.0);
    REQUIRE(spec.algorithms.size() == 2);
    CHECK(spec.algorithms[1].cfg.alpha_s == 5.0);
    CHECK(spec.seeds == std::vector<uint64_t>({1, 2, 3}));
    CHECK(spec.workers == 2);
    REQUIRE(spec.sweep.has_value());
    CHECK(spec.sweep->parameter == "corruption_prob");

    CHECK_THROWS(parse_experiment_spec("/nonexistent/spec.json"));
}

TEST_CASE("invalid specs are rejected before running") {
    ExperimentSpec spec;
    spec.environment = small_sim(3, 50, 1);
    spec.algorithms.clear();
    CHECK_THROWS(run_experiment(spec));

    spec.algorithms = {make_algorithm("LinUCB")};
    spec.seeds.clear();
    CHECK_THROWS(run_experiment(spec));
}
