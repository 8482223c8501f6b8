#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>

#include "combine/stream.hpp"

using namespace combine;

namespace {

struct TempCsv {
    std::string path;
    explicit TempCsv(const std::string& content) {
        static int counter = 0;
        path = (std::filesystem::temp_directory_path() /
                ("combine_stream_test_" + std::to_string(counter++) + ".csv"))
                   .string();
        std::ofstream out(path);
        out << content;
    }
    ~TempCsv() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("ingest basic shape") {
    TempCsv file("f0,f1,label\n0.1,0.2,1\n0.3,0.4,2\n0.5,0.6,1\n");
    StreamSchema schema;
    schema.feature_columns = {"f0", "f1"};
    const auto streams = ingest(file.path, schema);
    REQUIRE(streams.size() == 1);
    CHECK(streams[0].length() == 3);
    CHECK(streams[0].dimension() == 2);
    CHECK(streams[0].labels == std::vector<int>{1, 2, 1});
    CHECK(streams[0].features(1, 0) == doctest::Approx(0.3));
}

TEST_CASE("ingest rejects blank and non-numeric cells with row numbers") {
    TempCsv blank("f0,label\n0.1,1\n,2\n");
    StreamSchema schema;
    schema.feature_columns = {"f0"};
    CHECK_THROWS_WITH_AS(ingest(blank.path, schema),
                         doctest::Contains("line 3"), std::runtime_error);

    TempCsv junk("f0,label\nabc,1\n");
    CHECK_THROWS_WITH_AS(ingest(junk.path, schema),
                         doctest::Contains("non-numeric"), std::runtime_error);

    TempCsv nolabel("f0,other\n0.1,1\n");
    CHECK_THROWS(ingest(nolabel.path, schema));
}

TEST_CASE("ingest splits by stream id preserving row order") {
    TempCsv file(
        "f0,label,stream_id\n1,0,a\n2,0,b\n3,1,a\n4,1,b\n5,0,a\n");
    StreamSchema schema;
    schema.feature_columns = {"f0"};
    schema.stream_id_column = "stream_id";
    const auto streams = ingest(file.path, schema);
    REQUIRE(streams.size() == 2);
    CHECK(streams[0].stream_id == "a");
    CHECK(streams[0].length() == 3);
    CHECK(streams[0].features(2, 0) == doctest::Approx(5.0));
    CHECK(streams[1].stream_id == "b");
    CHECK(streams[1].labels == std::vector<int>{0, 1});
}

TEST_CASE("equal_frequency_bins") {
    std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    CHECK(equal_frequency_bins(v, 5) ==
          std::vector<int>({1, 1, 2, 2, 3, 3, 4, 4, 5, 5}));
    CHECK(equal_frequency_bins(v, 1) == std::vector<int>(10, 1));

    // Shift invariance.
    std::vector<double> shifted;
    for (double x : v) shifted.push_back(x + 7.0);
    CHECK(equal_frequency_bins(shifted, 5) == equal_frequency_bins(v, 5));

    // Monotone non-decreasing in the underlying value.
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> rand_vals(200);
    for (auto& x : rand_vals) x = unit(rng);
    const auto labels = equal_frequency_bins(rand_vals, 7);
    for (size_t i = 0; i < rand_vals.size(); ++i) {
        for (size_t j = 0; j < rand_vals.size(); ++j) {
            if (rand_vals[i] < rand_vals[j]) CHECK(labels[i] <= labels[j]);
        }
    }

    CHECK_THROWS(equal_frequency_bins({1.0, 1.0, 1.0}, 2));
}

TEST_CASE("savgol_smooth polynomial exactness") {
    const int n = 60;
    std::vector<double> constant(n, 3.7);
    auto out = savgol_smooth(constant, 11, 2);
    for (double y : out) CHECK(std::abs(y - 3.7) <= 1e-10);

    std::vector<double> ramp(n);
    for (int i = 0; i < n; ++i) ramp[static_cast<size_t>(i)] = 0.5 * i - 2.0;
    out = savgol_smooth(ramp, 11, 1);
    for (int i = 0; i < n; ++i) {
        CHECK(std::abs(out[static_cast<size_t>(i)] -
                       ramp[static_cast<size_t>(i)]) <= 1e-10);
    }

    std::vector<double> quad(n);
    for (int i = 0; i < n; ++i) {
        quad[static_cast<size_t>(i)] = 0.02 * i * i - 0.3 * i + 1.0;
    }
    for (int window : {5, 11, 21}) {
        out = savgol_smooth(quad, window, 2);
        for (int i = 0; i < n; ++i) {
            CHECK(std::abs(out[static_cast<size_t>(i)] -
                           quad[static_cast<size_t>(i)]) <= 1e-8);
        }
    }
}

TEST_CASE("savgol_smooth affine equivariance and validation") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> v(80);
    for (auto& x : v) x = unit(rng);
    const auto sv = savgol_smooth(v, 9, 2);
    std::vector<double> av;
    for (double x : v) av.push_back(2.5 * x - 1.0);
    const auto sav = savgol_smooth(av, 9, 2);
    for (size_t i = 0; i < v.size(); ++i) {
        CHECK(std::abs(sav[i] - (2.5 * sv[i] - 1.0)) <= 1e-8);
    }

    CHECK_THROWS(savgol_smooth(v, 8, 2));    // even window
    CHECK_THROWS(savgol_smooth(v, 81, 2));   // window > length
    CHECK_THROWS(savgol_smooth(v, 9, 9));    // order >= window
}

TEST_CASE("corrupt_features channels") {
    std::mt19937_64 rng(6);
    Eigen::VectorXd x(4);
    x << 0.9, 0.8, 0.7, 0.6;

    CorruptionMode off;
    off.prob = 0.0;
    CHECK((corrupt_features(x, off, rng) - x).norm() == doctest::Approx(0.0));

    const int n = 100000;
    CorruptionMode box{CorruptionKind::UniformBox, 1.0, {}};
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(4);
    for (int i = 0; i < n; ++i) mean += corrupt_features(x, box, rng);
    mean /= n;
    for (int i = 0; i < 4; ++i) CHECK(std::abs(mean(i) - 0.5) <= 0.01);

    Eigen::VectorXd wide = Eigen::VectorXd::Zero(9);
    CorruptionMode onehot{CorruptionKind::RandomOneHot, 1.0, {}};
    std::vector<int> counts(9, 0);
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd y = corrupt_features(wide, onehot, rng);
        CHECK(y.sum() == doctest::Approx(1.0));
        for (int d = 0; d < 9; ++d) {
            if (y(d) == 1.0) ++counts[static_cast<size_t>(d)];
        }
    }
    for (int d = 0; d < 9; ++d) {
        CHECK(std::abs(counts[static_cast<size_t>(d)] / double(n) - 1.0 / 9) <=
              0.01);
    }

    CorruptionMode mixed{CorruptionKind::Mixed, 1.0, {1, 3}};
    for (int i = 0; i < 1000; ++i) {
        const Eigen::VectorXd y = corrupt_features(x, mixed, rng);
        CHECK((y(1) == 0.0 || y(1) == 1.0));
        CHECK((y(3) == 0.0 || y(3) == 1.0));
        CHECK(y(0) >= 0.0);
        CHECK(y(0) <= 1.0);
    }
}

TEST_CASE("bandit_replay oracle and fixed-action agents") {
    LabeledStream s;
    const int t_len = 2000;
    s.features = Eigen::MatrixXd::Zero(t_len, 3);
    std::mt19937_64 label_rng(9);
    std::uniform_int_distribution<int> pick(0, 2);
    int zeros = 0;
    for (int t = 0; t < t_len; ++t) {
        const int lab = pick(label_rng);
        s.labels.push_back(lab);
        s.features(t, lab) = 1.0;
        if (lab == 0) ++zeros;
    }

    CorruptionMode off;
    std::mt19937_64 rng(10);

    // Oracle agent reads the one-hot context.
    ReplayDriver oracle;
    double oracle_regret = 0.0;
    oracle.select = [](int, const Eigen::VectorXd& ctx, long, std::mt19937_64&) {
        int best = 0;
        ctx.maxCoeff(&best);
        return best;
    };
    oracle.update = [&](int, const Eigen::VectorXd&, int, double r, long) {
        oracle_regret += 1.0 - r;
    };
    bandit_replay({s}, off, oracle, {0}, t_len, rng);
    CHECK(oracle_regret == doctest::Approx(0.0));

    // Fixed-action agent: regret = (1 - label frequency) * T.
    ReplayDriver fixed;
    double fixed_regret = 0.0;
    fixed.select = [](int, const Eigen::VectorXd&, long, std::mt19937_64&) {
        return 0;
    };
    fixed.update = [&](int, const Eigen::VectorXd&, int, double r, long) {
        fixed_regret += 1.0 - r;
    };
    const auto records = bandit_replay({s}, off, fixed, {0}, t_len, rng);
    CHECK(fixed_regret == doctest::Approx(t_len - zeros));
    CHECK(records.size() == static_cast<size_t>(t_len));

    // Exhausted stream detection.
    CHECK_THROWS(bandit_replay({s}, off, fixed, {10}, t_len, rng));
}

TEST_CASE("bandit_replay full corruption caps accuracy at label frequency") {
    LabeledStream s;
    const int t_len = 10000;
    s.features = Eigen::MatrixXd::Zero(t_len, 3);
    std::mt19937_64 label_rng(3);
    std::discrete_distribution<int> pick{0.5, 0.3, 0.2};
    std::map<int, int> freq;
    for (int t = 0; t < t_len; ++t) {
        const int lab = pick(label_rng);
        s.labels.push_back(lab);
        s.features(t, lab) = 1.0;
        ++freq[lab];
    }
    double max_freq = 0.0;
    for (const auto& [lab, count] : freq) {
        max_freq = std::max(max_freq, count / double(t_len));
    }

    CorruptionMode full{CorruptionKind::RandomOneHot, 1.0, {}};
    std::mt19937_64 rng(11);
    ReplayDriver context_only;
    double correct = 0.0;
    context_only.select = [](int, const Eigen::VectorXd& ctx, long,
                             std::mt19937_64&) {
        int best = 0;
        ctx.maxCoeff(&best);
        return best;
    };
    context_only.update = [&](int, const Eigen::VectorXd&, int, double r,
                              long) { correct += r; };
    bandit_replay({s}, full, context_only, {0}, t_len, rng);
    CHECK(correct / t_len <= max_freq + 0.02);
}

TEST_CASE("bandit_replay deterministic given seed and offsets") {
    LabeledStream s;
    s.features = Eigen::MatrixXd::Random(300, 2).cwiseAbs();
    for (int t = 0; t < 300; ++t) s.labels.push_back(t % 2);
    CorruptionMode mode{CorruptionKind::UniformBox, 0.5, {}};
    auto run = [&]() {
        std::mt19937_64 rng(42);
        ReplayDriver drv;
        drv.select = [](int, const Eigen::VectorXd& ctx, long,
                        std::mt19937_64& r) {
            std::uniform_int_distribution<int> pick(0, 1);
            return ctx(0) > 0.5 ? 1 : pick(r);
        };
        drv.update = [](int, const Eigen::VectorXd&, int, double, long) {};
        return bandit_replay({s}, mode, drv, {5}, 200, rng);
    };
    const auto r1 = run();
    const auto r2 = run();
    REQUIRE(r1.size() == r2.size());
    for (size_t i = 0; i < r1.size(); ++i) {
        CHECK(r1[i].action == r2[i].action);
        CHECK(r1[i].reward == r2[i].reward);
    }
}
