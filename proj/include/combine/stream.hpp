#ifndef COMBINE_STREAM_HPP
#define COMBINE_STREAM_HPP

#include <Eigen/Dense>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace combine {

/// One labeled time series replayed as a bandit problem: rows are time
/// steps, labels are the per-step optimal actions (0-based).
struct LabeledStream {
    Eigen::MatrixXd features;  // T x d
    std::vector<int> labels;
    std::string stream_id;

    long length() const { return features.rows(); }
    int dimension() const { return static_cast<int>(features.cols()); }
};

enum class CorruptionKind { UniformBox, RandomOneHot, Mixed };

/// Context corruption channel for stream replay. Mixed draws uniform values
/// on the continuous coordinates and Bernoulli(0.5) on binary_dims.
struct CorruptionMode {
    CorruptionKind kind = CorruptionKind::UniformBox;
    double prob = 0.0;
    std::vector<int> binary_dims;
};

/// Column roles for ingest: named feature columns, the label column and an
/// optional stream-id column.
struct StreamSchema {
    std::vector<std::string> feature_columns;
    std::string label_column = "label";
    std::string stream_id_column;  // empty -> single stream
};

/// Parses a headered CSV into one stream per distinct stream id, preserving
/// row order. Missing values and non-numeric features are errors.
std::vector<LabeledStream> ingest(const std::string& path,
                                  const StreamSchema& schema);

/// Equal-frequency binning into k classes; labels are 1..k.
std::vector<int> equal_frequency_bins(const std::vector<double>& values, int k);

/// Savitzky-Golay smoothing: centered least-squares polynomial fit of the
/// given order, truncated windows at the edges (output length == input).
std::vector<double> savgol_smooth(const std::vector<double>& series,
                                  int window, int order);

/// Applies the corruption channel with probability mode.prob.
Eigen::VectorXd corrupt_features(const Eigen::VectorXd& x,
                                 const CorruptionMode& mode,
                                 std::mt19937_64& rng);

struct ReplayRecord {
    int stream;
    long t;
    int action;
    int label;
    double reward;
};

/// Agent driver for replay: select sees only the corrupted context, update
/// receives the bandit feedback for the chosen action.
struct ReplayDriver {
    std::function<int(int stream, const Eigen::VectorXd& ctx, long t,
                      std::mt19937_64& rng)>
        select;
    std::function<void(int stream, const Eigen::VectorXd& ctx, int action,
                       double reward, long t)>
        update;
    std::function<void()> end_round;  // optional
};

/// Replays the streams for `horizon` steps from the given per-stream
/// offsets; reward is 1 iff the action equals the label, so regret equals
/// the misclassification count.
std::vector<ReplayRecord> bandit_replay(const std::vector<LabeledStream>& streams,
                                        const CorruptionMode& mode,
                                        const ReplayDriver& driver,
                                        const std::vector<long>& start_offsets,
                                        long horizon, std::mt19937_64& rng);

}  // namespace combine

#endif
