#ifndef COMBINE_REFEREE_HPP
#define COMBINE_REFEREE_HPP

#include <algorithm>
#include <array>
#include <cmath>

namespace combine {

enum class PolicyChoice { ContextualBandit = 0, TransitionMab = 1 };

/// Gradient-bandit referee arbitrating between the CB (index 0) and the
/// transition-aware MAB (index 1) via a softmax over two preference values.
struct RefereeState {
    std::array<double, 2> preferences{0.0, 0.0};
    double step_size = 0.5;
};

/// Softmax of the preference pair, max-subtracted for overflow safety.
inline std::array<double, 2> referee_probabilities(const RefereeState& state) {
    const double m = std::max(state.preferences[0], state.preferences[1]);
    const double e0 = std::exp(state.preferences[0] - m);
    const double e1 = std::exp(state.preferences[1] - m);
    const double z = e0 + e1;
    return {e0 / z, e1 / z};
}

/// Preference update:
///   H_chosen += delta_R * (r - pb_chosen)
///   H_other  += delta_R * (1 - 2r) * (1 - pb_chosen)
/// pb_chosen must be the probability the chosen policy had at selection time.
inline void referee_update(RefereeState& state, PolicyChoice chosen,
                           double reward, double pb_chosen) {
    const size_t c = static_cast<size_t>(chosen);
    const size_t o = 1 - c;
    state.preferences[c] += state.step_size * (reward - pb_chosen);
    state.preferences[o] +=
        state.step_size * (1.0 - 2.0 * reward) * (1.0 - pb_chosen);
}

}  // namespace combine

#endif
