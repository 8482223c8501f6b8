#ifndef COMBINE_MAB_HPP
#define COMBINE_MAB_HPP

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace combine {

/// Per-arm statistics shared by the stationary and discounted UCB policies.
struct MabArmState {
    double mean_reward = 0.0;
    long play_count = 0;
};

/// UCB score R̄ + alpha_b * sqrt(2 ln t / n). Untried arms score +infinity
/// so every candidate is tried at least once.
inline double ucb_score(const MabArmState& arm, long t, double alpha_b) {
    if (arm.play_count == 0) {
        return std::numeric_limits<double>::infinity();
    }
    return arm.mean_reward +
           alpha_b * std::sqrt(2.0 * std::log(static_cast<double>(t)) /
                               static_cast<double>(arm.play_count));
}

/// Exponential recency-weighted mean. gamma = 1 replaces the mean outright.
inline double discounted_mean_update(double mean, double reward, double gamma) {
    return mean + gamma * (reward - mean);
}

/// Sample-average mean update; call with the post-increment play count.
inline double sample_average_update(double mean, double reward, long count) {
    return mean + (reward - mean) / static_cast<double>(count);
}

/// Argmax of ucb_score over the candidate subset, ties to the lowest index.
inline int mab_select(const std::vector<MabArmState>& arms,
                      const std::vector<int>& candidates, long t,
                      double alpha_b) {
    if (candidates.empty()) {
        throw std::invalid_argument("mab_select: no candidates");
    }
    int best = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int a : candidates) {
        const double score = ucb_score(arms.at(static_cast<size_t>(a)), t, alpha_b);
        if (score > best_score || (score == best_score && a < best)) {
            best = a;
            best_score = score;
        }
    }
    return best;
}

}  // namespace combine

#endif
