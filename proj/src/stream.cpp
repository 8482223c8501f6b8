#include "combine/stream.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace combine {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

std::vector<LabeledStream> ingest(const std::string& path,
                                  const StreamSchema& schema) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("ingest: cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("ingest: empty file " + path);
    }
    const auto header = split_csv_line(line);
    std::map<std::string, size_t> column_index;
    for (size_t i = 0; i < header.size(); ++i) {
        column_index[trim(header[i])] = i;
    }

    std::vector<size_t> feature_idx;
    for (const auto& name : schema.feature_columns) {
        auto it = column_index.find(name);
        if (it == column_index.end()) {
            throw std::runtime_error("ingest: missing column '" + name + "'");
        }
        feature_idx.push_back(it->second);
    }
    auto label_it = column_index.find(schema.label_column);
    if (label_it == column_index.end()) {
        throw std::runtime_error("ingest: missing column '" +
                                 schema.label_column + "'");
    }
    const size_t label_idx = label_it->second;
    size_t id_idx = 0;
    const bool has_id = !schema.stream_id_column.empty();
    if (has_id) {
        auto it = column_index.find(schema.stream_id_column);
        if (it == column_index.end()) {
            throw std::runtime_error("ingest: missing column '" +
                                     schema.stream_id_column + "'");
        }
        id_idx = it->second;
    }

    struct RawStream {
        std::vector<std::vector<double>> rows;
        std::vector<int> labels;
    };
    std::map<std::string, RawStream> raw;
    std::vector<std::string> id_order;

    long row_number = 1;
    while (std::getline(in, line)) {
        ++row_number;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() < header.size()) {
            throw std::runtime_error("ingest: short row at line " +
                                     std::to_string(row_number));
        }
        std::vector<double> features;
        features.reserve(feature_idx.size());
        for (size_t idx : feature_idx) {
            const std::string cell = trim(fields[idx]);
            if (cell.empty()) {
                throw std::runtime_error("ingest: missing value at line " +
                                         std::to_string(row_number));
            }
            try {
                size_t pos = 0;
                const double v = std::stod(cell, &pos);
                if (pos != cell.size()) throw std::invalid_argument(cell);
                features.push_back(v);
            } catch (const std::exception&) {
                throw std::runtime_error("ingest: non-numeric feature '" +
                                         cell + "' at line " +
                                         std::to_string(row_number));
            }
        }
        const std::string label_cell = trim(fields[label_idx]);
        int label;
        try {
            label = std::stoi(label_cell);
        } catch (const std::exception&) {
            throw std::runtime_error("ingest: bad label '" + label_cell +
                                     "' at line " + std::to_string(row_number));
        }
        if (label < 0) {
            throw std::runtime_error("ingest: negative label at line " +
                                     std::to_string(row_number));
        }
        const std::string id = has_id ? trim(fields[id_idx]) : "";
        auto [it, inserted] = raw.try_emplace(id);
        if (inserted) id_order.push_back(id);
        it->second.rows.push_back(std::move(features));
        it->second.labels.push_back(label);
    }

    std::vector<LabeledStream> streams;
    streams.reserve(id_order.size());
    for (const auto& id : id_order) {
        const RawStream& rs = raw.at(id);
        LabeledStream s;
        s.stream_id = id;
        s.labels = rs.labels;
        s.features.resize(static_cast<long>(rs.rows.size()),
                          static_cast<long>(feature_idx.size()));
        for (size_t r = 0; r < rs.rows.size(); ++r) {
            for (size_t c = 0; c < rs.rows[r].size(); ++c) {
                s.features(static_cast<long>(r), static_cast<long>(c)) =
                    rs.rows[r][c];
            }
        }
        streams.push_back(std::move(s));
    }
    return streams;
}

std::vector<int> equal_frequency_bins(const std::vector<double>& values,
                                      int k) {
    if (k < 1) {
        throw std::invalid_argument("equal_frequency_bins: k >= 1");
    }
    const size_t n = values.size();
    if (n < static_cast<size_t>(k)) {
        throw std::invalid_argument("equal_frequency_bins: k > sample size");
    }
    const std::set<double> distinct(values.begin(), values.end());
    if (distinct.size() < static_cast<size_t>(k)) {
        throw std::invalid_argument(
            "equal_frequency_bins: k exceeds distinct value count");
    }
    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> edges;  // lower edges of bins 2..k
    edges.reserve(static_cast<size_t>(k) - 1);
    for (int j = 1; j < k; ++j) {
        edges.push_back(sorted[static_cast<size_t>(j) * n / k]);
    }
    std::vector<int> labels(n);
    for (size_t i = 0; i < n; ++i) {
        int bin = 1;
        for (double e : edges) {
            if (values[i] >= e) ++bin;
        }
        labels[i] = bin;
    }
    return labels;
}

std::vector<double> savgol_smooth(const std::vector<double>& series,
                                  int window, int order) {
    const long n = static_cast<long>(series.size());
    if (window % 2 == 0 || window > n) {
        throw std::invalid_argument(
            "savgol_smooth: window must be odd and <= series length");
    }
    if (order >= window) {
        throw std::invalid_argument("savgol_smooth: order must be < window");
    }
    const int half = window / 2;

    // Least-squares fit over [lo, hi] in coordinates centered at `at`,
    // evaluated at the center; returns the fitted constant term.
    auto fit_center = [&](long lo, long hi, long at) {
        const long m = hi - lo + 1;
        Eigen::MatrixXd vand(m, order + 1);
        Eigen::VectorXd y(m);
        for (long r = 0; r < m; ++r) {
            const double x = static_cast<double>(lo + r - at);
            double pw = 1.0;
            for (int c = 0; c <= order; ++c) {
                vand(r, c) = pw;
                pw *= x;
            }
            y(r) = series[static_cast<size_t>(lo + r)];
        }
        const Eigen::VectorXd coef = vand.colPivHouseholderQr().solve(y);
        return coef(0);
    };

    std::vector<double> out(static_cast<size_t>(n));
    // The interior uses a fixed window, so the projection onto the center
    // value is a constant convolution kernel.
    Eigen::VectorXd kernel;
    {
        Eigen::MatrixXd vand(window, order + 1);
        for (int r = 0; r < window; ++r) {
            const double x = static_cast<double>(r - half);
            double pw = 1.0;
            for (int c = 0; c <= order; ++c) {
                vand(r, c) = pw;
                pw *= x;
            }
        }
        const Eigen::MatrixXd gram = vand.transpose() * vand;
        kernel = vand * gram.ldlt().solve(
                            Eigen::VectorXd::Unit(order + 1, 0).eval());
    }
    for (long i = 0; i < n; ++i) {
        if (i >= half && i + half < n) {
            double acc = 0.0;
            for (int r = 0; r < window; ++r) {
                acc += kernel(r) * series[static_cast<size_t>(i - half + r)];
            }
            out[static_cast<size_t>(i)] = acc;
        } else {
            const long lo = std::max<long>(0, i - half);
            const long hi = std::min<long>(n - 1, i + half);
            out[static_cast<size_t>(i)] = fit_center(lo, hi, i);
        }
    }
    return out;
}

Eigen::VectorXd corrupt_features(const Eigen::VectorXd& x,
                                 const CorruptionMode& mode,
                                 std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (mode.prob <= 0.0 || unit(rng) >= mode.prob) {
        return x;
    }
    const long d = x.size();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(d);
    switch (mode.kind) {
        case CorruptionKind::UniformBox:
            for (long i = 0; i < d; ++i) out(i) = unit(rng);
            break;
        case CorruptionKind::RandomOneHot: {
            std::uniform_int_distribution<long> pick(0, d - 1);
            out(pick(rng)) = 1.0;
            break;
        }
        case CorruptionKind::Mixed: {
            std::vector<bool> binary(static_cast<size_t>(d), false);
            for (int i : mode.binary_dims) binary[static_cast<size_t>(i)] = true;
            for (long i = 0; i < d; ++i) {
                out(i) = binary[static_cast<size_t>(i)]
                             ? (unit(rng) < 0.5 ? 1.0 : 0.0)
                             : unit(rng);
            }
            break;
        }
    }
    return out;
}

std::vector<ReplayRecord> bandit_replay(const std::vector<LabeledStream>& streams,
                                        const CorruptionMode& mode,
                                        const ReplayDriver& driver,
                                        const std::vector<long>& start_offsets,
                                        long horizon, std::mt19937_64& rng) {
    if (start_offsets.size() != streams.size()) {
        throw std::invalid_argument("bandit_replay: one offset per stream");
    }
    for (size_t i = 0; i < streams.size(); ++i) {
        if (start_offsets[i] + horizon > streams[i].length()) {
            throw std::runtime_error("bandit_replay: stream '" +
                                     streams[i].stream_id + "' exhausted");
        }
    }
    std::vector<ReplayRecord> records;
    records.reserve(static_cast<size_t>(horizon) * streams.size());
    for (long t = 0; t < horizon; ++t) {
        for (size_t i = 0; i < streams.size(); ++i) {
            const long row = start_offsets[i] + t;
            const Eigen::VectorXd ctx = corrupt_features(
                streams[i].features.row(row).transpose(), mode, rng);
            const int action = driver.select(static_cast<int>(i), ctx, t, rng);
            const int label = streams[i].labels[static_cast<size_t>(row)];
            const double reward = action == label ? 1.0 : 0.0;
            driver.update(static_cast<int>(i), ctx, action, reward, t);
            records.push_back(
                ReplayRecord{static_cast<int>(i), t, action, label, reward});
        }
        if (driver.end_round) driver.end_round();
    }
    return records;
}

}  // namespace combine
