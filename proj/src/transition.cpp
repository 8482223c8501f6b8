#include "combine/transition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace combine {

void adjacency_update(AdjacencyMatrix& adj, std::optional<int> prev_indicator,
                      int played, double reward) {
    if (!prev_indicator.has_value() || *prev_indicator == played) {
        return;
    }
    adj.counts(*prev_indicator, played) += reward;
}

void indicator_update(IndicatorState& ind, int played, double reward) {
    if (reward == 1.0) {
        ind.current = played;
    } else {
        ind.previous = ind.current;
    }
}

void preference_update(PreferenceMatrix& pref, int prev_indicator, int played,
                       double reward) {
    if (prev_indicator == played) {
        return;
    }
    const Eigen::VectorXd row = pref.prefs.row(prev_indicator);
    const Eigen::VectorXd exps = (row.array() - row.maxCoeff()).exp();
    const double prob = exps(played) / exps.sum();
    pref.prefs(prev_indicator, played) += pref.step_size * (reward - prob);
}

std::vector<int> adj_select(IndicatorState& ind, const Eigen::MatrixXd& ranking,
                            double reward, bool any_play_yet) {
    const int k = static_cast<int>(ranking.rows());
    if (!any_play_yet || !ind.previous.has_value()) {
        std::vector<int> all(static_cast<size_t>(k));
        std::iota(all.begin(), all.end(), 0);
        return all;
    }
    ind.reach = reward == 1.0 ? 0 : std::min(ind.reach + 1, k);

    std::vector<int> order(static_cast<size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    const int row = *ind.previous;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (ranking(row, a) != ranking(row, b)) {
            return ranking(row, a) > ranking(row, b);
        }
        return a < b;
    });
    order.resize(static_cast<size_t>(std::min(ind.reach + 1, k)));
    return order;
}

int softmax_action_sample(const PreferenceMatrix& pref, int prev_indicator,
                          const std::vector<int>& candidates,
                          std::mt19937_64& rng) {
    return softmax_row_sample(pref.prefs, prev_indicator, candidates, rng);
}

int softmax_row_sample(const Eigen::MatrixXd& prefs, int row,
                       const std::vector<int>& candidates,
                       std::mt19937_64& rng) {
    if (candidates.empty()) {
        throw std::invalid_argument("softmax_action_sample: no candidates");
    }
    std::vector<double> weights;
    weights.reserve(candidates.size());
    double max_pref = -std::numeric_limits<double>::infinity();
    for (int a : candidates) {
        max_pref = std::max(max_pref, prefs(row, a));
    }
    for (int a : candidates) {
        weights.push_back(std::exp(prefs(row, a) - max_pref));
    }
    std::discrete_distribution<size_t> dist(weights.begin(), weights.end());
    return candidates[dist(rng)];
}

AdjacencyMatrix common_adjacency(const std::vector<AdjacencyMatrix>& per_user) {
    if (per_user.empty()) {
        throw std::invalid_argument("common_adjacency: empty user list");
    }
    AdjacencyMatrix common(per_user.front().num_actions());
    common.counts.setZero();
    for (const auto& adj : per_user) {
        if (adj.num_actions() != common.num_actions()) {
            throw std::invalid_argument("common_adjacency: shape mismatch");
        }
        common.counts += adj.counts;
    }
    return common;
}

PreferenceMatrix common_preference(const std::vector<PreferenceMatrix>& prefs,
                                   const std::vector<AdjacencyMatrix>& adjs,
                                   const AdjacencyMatrix& common_adj) {
    if (prefs.empty() || prefs.size() != adjs.size()) {
        throw std::invalid_argument("common_preference: shape mismatch");
    }
    PreferenceMatrix common(prefs.front().num_actions(),
                            prefs.front().step_size);
    for (size_t j = 0; j < prefs.size(); ++j) {
        if (prefs[j].num_actions() != common.num_actions() ||
            adjs[j].num_actions() != common.num_actions() ||
            common_adj.num_actions() != common.num_actions()) {
            throw std::invalid_argument("common_preference: shape mismatch");
        }
        common.prefs.array() +=
            prefs[j].prefs.array() * adjs[j].counts.array();
    }
    common.prefs.array() /= common_adj.counts.array();
    return common;
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& matrix) {
    const int k = static_cast<int>(matrix.cols());
    for (int c = 0; c < k; ++c) {
        out << (c == 0 ? "" : ",") << "a" << c;
    }
    out << "\n";
    for (int r = 0; r < matrix.rows(); ++r) {
        for (int c = 0; c < k; ++c) {
            out << (c == 0 ? "" : ",") << matrix(r, c);
        }
        out << "\n";
    }
}

}  // namespace combine
