#ifndef COMBINE_SIM_ENV_HPP
#define COMBINE_SIM_ENV_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <random>
#include <stdexcept>
#include <vector>

namespace combine {

/// Truncated-random-walk environment: a hidden state in [0,1] drifts by
/// +-step_size per step, an interval partition maps states to best actions,
/// and the observed context is the one-hot of the best action, replaced by
/// uniform noise with probability corruption_prob.
struct EnvConfig {
    int num_actions = 5;
    double step_size = 0.1;        // c
    double corruption_prob = 0.0;  // p
    double walk_up_prob = 0.5;
    long horizon = 2500;
    std::vector<double> partition;  // K+1 breakpoints; empty -> uniform

    std::vector<double> effective_partition() const {
        if (!partition.empty()) {
            return partition;
        }
        std::vector<double> q(static_cast<size_t>(num_actions) + 1);
        for (int i = 0; i <= num_actions; ++i) {
            q[static_cast<size_t>(i)] = static_cast<double>(i) / num_actions;
        }
        return q;
    }
};

struct EnvState {
    double hidden = 0.5;  // s
    long time = 0;
};

/// One random-walk move, clipped to [0,1].
inline double step_state(double s, double c, int z) {
    return std::clamp(z == 1 ? s + c : s - c, 0.0, 1.0);
}

/// Index k such that s lies in [q_k, q_{k+1}); s = 1 maps to the last action.
inline int best_action(double s, const std::vector<double>& partition) {
    const int k = static_cast<int>(partition.size()) - 1;
    for (int i = 0; i < k; ++i) {
        if (s < partition[static_cast<size_t>(i) + 1]) {
            return i;
        }
    }
    return k - 1;
}

/// One-hot encoding of the best action for state s.
inline Eigen::VectorXd gen_context(double s, const std::vector<double>& partition,
                                   int num_actions) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(num_actions);
    x(best_action(s, partition)) = 1.0;
    return x;
}

struct Observation {
    Eigen::VectorXd context;
    bool corrupted;
};

/// Observation plus corruption flag, for trace export and tests only.
inline Observation observe_with_flag(const EnvState& state,
                                     const EnvConfig& cfg,
                                     std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto partition = cfg.effective_partition();
    double s = state.hidden;
    bool corrupted = false;
    if (cfg.corruption_prob > 0.0 && unit(rng) < cfg.corruption_prob) {
        s = unit(rng);
        corrupted = true;
    }
    return Observation{gen_context(s, partition, cfg.num_actions), corrupted};
}

/// Possibly corrupted observation of the current state. The corruption flag
/// is internal to the environment and never exposed to the agent.
inline Eigen::VectorXd observe(const EnvState& state, const EnvConfig& cfg,
                               std::mt19937_64& rng) {
    return observe_with_flag(state, cfg, rng).context;
}

/// Deterministic Bernoulli reward: 1 iff the action is best for the state.
inline double reward(const EnvState& state, int action,
                     const std::vector<double>& partition) {
    return action == best_action(state.hidden, partition) ? 1.0 : 0.0;
}

/// Advances the hidden state by one truncated-random-walk step.
inline EnvState advance(const EnvState& state, const EnvConfig& cfg,
                        std::mt19937_64& rng) {
    if (state.time >= cfg.horizon) {
        throw std::runtime_error("advance: horizon exceeded");
    }
    std::bernoulli_distribution up(cfg.walk_up_prob);
    EnvState next;
    next.hidden = step_state(state.hidden, cfg.step_size, up(rng) ? 1 : 0);
    next.time = state.time + 1;
    return next;
}

}  // namespace combine

#endif
