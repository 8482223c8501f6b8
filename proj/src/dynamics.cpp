#include "combine/dynamics.hpp"

#include <cmath>
#include <stdexcept>

#include "combine/referee.hpp"

namespace combine {

double softmax_jacobian_entry(const std::vector<double>& pb, size_t k,
                              size_t j) {
    return pb.at(k) * ((k == j ? 1.0 : 0.0) - pb.at(j));
}

double ode_rhs(double p, const DynamicsParams& params) {
    const double gap = params.gap;
    const double rs = params.r_star;
    return params.delta_r * p *
           (gap - rs + p * (2.0 * p - 3.0) * (gap * p - rs + 1.0) + 1.0);
}

double c_infinity(const DynamicsParams& params) {
    if (params.gap <= 0.0) {
        throw std::domain_error(
            "c_infinity: undefined (division by zero); no preference "
            "equilibrium predicted");
    }
    const double gap = params.gap;
    const double rs = params.r_star;
    const double disc = 9.0 * gap * gap - 4.0 * gap * rs + 4.0 * gap +
                        4.0 * rs * rs - 8.0 * rs + 4.0;
    double c = (gap + 2.0 * rs + std::sqrt(disc) - 2.0) / (4.0 * gap);
    // Floating-point roundoff only; anything further out is a real error.
    if (c > 1.0 && c < 1.0 + 1e-12) c = 1.0;
    if (c < 0.0 && c > -1e-12) c = 0.0;
    return c;
}

std::vector<std::pair<double, double>> integrate_dynamics(
    const DynamicsParams& params, double t_end, double dt) {
    if (dt <= 0.0) {
        throw std::invalid_argument("integrate_dynamics: dt must be positive");
    }
    std::vector<std::pair<double, double>> trajectory;
    trajectory.reserve(static_cast<size_t>(t_end / dt) + 2);
    double t = 0.0;
    double p = params.p0;
    trajectory.emplace_back(t, p);
    while (t < t_end - 1e-12) {
        const double h = std::min(dt, t_end - t);
        const double k1 = ode_rhs(p, params);
        const double k2 = ode_rhs(p + 0.5 * h * k1, params);
        const double k3 = ode_rhs(p + 0.5 * h * k2, params);
        const double k4 = ode_rhs(p + h * k3, params);
        p += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!std::isfinite(p)) {
            throw std::runtime_error("integrate_dynamics: non-finite state");
        }
        if (p < 0.0 || p > 1.0) {
            p = std::min(std::max(p, 0.0), 1.0);
        }
        t += h;
        trajectory.emplace_back(t, p);
    }
    return trajectory;
}

std::vector<double> monte_carlo_two_policy(const DynamicsParams& params,
                                           long horizon, int replications,
                                           std::mt19937_64& rng) {
    if (replications < 1) {
        throw std::invalid_argument("monte_carlo_two_policy: replications >= 1");
    }
    const double r_inferior = params.r_star - params.gap;
    if (params.r_star < 0.0 || params.r_star > 1.0 || r_inferior < 0.0 ||
        r_inferior > 1.0) {
        throw std::invalid_argument(
            "monte_carlo_two_policy: invalid Bernoulli means");
    }
    if (params.p0 <= 0.0 || params.p0 >= 1.0) {
        throw std::invalid_argument("monte_carlo_two_policy: p0 in (0,1)");
    }
    const double h0 = std::log(params.p0 / (1.0 - params.p0));

    std::vector<double> mean(static_cast<size_t>(horizon) + 1, 0.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int n = 0; n < replications; ++n) {
        RefereeState referee;
        referee.step_size = params.delta_r;
        referee.preferences = {h0, 0.0};
        for (long t = 0; t <= horizon; ++t) {
            const auto pb = referee_probabilities(referee);
            mean[static_cast<size_t>(t)] += pb[0];
            if (t == horizon) break;
            const bool chose_superior = unit(rng) < pb[0];
            const double p_reward = chose_superior ? params.r_star : r_inferior;
            const double reward = unit(rng) < p_reward ? 1.0 : 0.0;
            const PolicyChoice chosen = chose_superior
                                            ? PolicyChoice::ContextualBandit
                                            : PolicyChoice::TransitionMab;
            referee_update(referee, chosen, reward,
                           chose_superior ? pb[0] : pb[1]);
        }
    }
    for (double& m : mean) m /= replications;
    return mean;
}

}  // namespace combine
