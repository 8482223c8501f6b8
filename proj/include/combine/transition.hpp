#ifndef COMBINE_TRANSITION_HPP
#define COMBINE_TRANSITION_HPP

#include <Eigen/Dense>
#include <optional>
#include <ostream>
#include <random>
#include <vector>

namespace combine {

/// Count-based action-to-action transition matrix, initialized to ones.
struct AdjacencyMatrix {
    Eigen::MatrixXd counts;

    explicit AdjacencyMatrix(int num_actions)
        : counts(Eigen::MatrixXd::Ones(num_actions, num_actions)) {}

    int num_actions() const { return static_cast<int>(counts.rows()); }
};

/// Real-valued preference alternative; rows define softmax distributions
/// over successor actions.
struct PreferenceMatrix {
    Eigen::MatrixXd prefs;
    double step_size;  // alpha_S

    PreferenceMatrix(int num_actions, double alpha_s)
        : prefs(Eigen::MatrixXd::Zero(num_actions, num_actions)),
          step_size(alpha_s) {}

    int num_actions() const { return static_cast<int>(prefs.rows()); }
};

/// Indicator-action bookkeeping: most recent rewarded action (current, a+),
/// its predecessor (previous, a-), and the reach parameter beta.
struct IndicatorState {
    std::optional<int> current;
    std::optional<int> previous;
    int reach = 1;
};

/// counts[a-, a] += r when the previous indicator is set and differs from
/// the played action.
void adjacency_update(AdjacencyMatrix& adj, std::optional<int> prev_indicator,
                      int played, double reward);

/// Reward 1 promotes the played action to current; reward 0 demotes the
/// current indicator to previous.
void indicator_update(IndicatorState& ind, int played, double reward);

/// prefs[a-, a] += alpha_S * (r - softmax(row a-)[a]), same a- != a guard
/// as the count variant.
void preference_update(PreferenceMatrix& pref, int prev_indicator, int played,
                       double reward);

/// Candidate-subset selection. Returns the full action set when no action
/// has ever been scored or there is no previous indicator; otherwise resets
/// (r = 1) or grows the reach and returns the top (reach + 1) entries of the
/// previous indicator's row, sorted descending with index tie-break.
/// ranking may be either the count or the preference matrix.
std::vector<int> adj_select(IndicatorState& ind, const Eigen::MatrixXd& ranking,
                            double reward, bool any_play_yet);

/// Samples from the softmax over prefs[a-, candidates], renormalized over
/// the restricted candidate set.
int softmax_action_sample(const PreferenceMatrix& pref, int prev_indicator,
                          const std::vector<int>& candidates,
                          std::mt19937_64& rng);

/// Same sampling rule on a bare matrix row.
int softmax_row_sample(const Eigen::MatrixXd& prefs, int row,
                       const std::vector<int>& candidates,
                       std::mt19937_64& rng);

/// Elementwise sum of the per-user matrices.
AdjacencyMatrix common_adjacency(const std::vector<AdjacencyMatrix>& per_user);

/// Count-weighted average of user preferences:
/// sum_j prefs^j .* adj^j ./ adj_common (elementwise).
PreferenceMatrix common_preference(const std::vector<PreferenceMatrix>& prefs,
                                   const std::vector<AdjacencyMatrix>& adjs,
                                   const AdjacencyMatrix& common_adj);

/// Row-major CSV dump with a header of action labels a0..a{K-1}.
void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& matrix);

}  // namespace combine

#endif
