#ifndef COMBINE_DYNAMICS_HPP
#define COMBINE_DYNAMICS_HPP

#include <random>
#include <utility>
#include <vector>

namespace combine {

/// Parameters of the mean-field referee dynamics: the superior policy's
/// average reward r_star, the reward gap between the policies, the referee
/// step size and the initial probability of choosing the superior policy.
struct DynamicsParams {
    double delta_r = 0.5;
    double r_star = 1.0;
    double gap = 0.5;  // Delta_R = r_pi0 - r_pi1
    double p0 = 0.5;
};

/// dp_k/dH_j of the softmax policy: p_k (I[k=j] - p_j).
double softmax_jacobian_entry(const std::vector<double>& pb, size_t k, size_t j);

/// Drift of the probability of choosing the superior policy:
/// dp/dt = delta_R p (Delta - r* + p(2p - 3)(Delta p - r* + 1) + 1).
double ode_rhs(double p, const DynamicsParams& params);

/// Closed-form stationary probability of choosing the superior policy.
/// Undefined at gap = 0 (division by zero).
double c_infinity(const DynamicsParams& params);

/// Fixed-step classical 4th-order integration of ode_rhs from p0 to t_end.
/// Returns (t, p) samples including both endpoints.
std::vector<std::pair<double, double>> integrate_dynamics(
    const DynamicsParams& params, double t_end, double dt);

/// Simulates the actual gradient bandit against two Bernoulli reward sources
/// with means r_star and r_star - gap; returns the across-replication mean
/// of pb_pi0 at each of horizon + 1 time points (step 0 included).
std::vector<double> monte_carlo_two_policy(const DynamicsParams& params,
                                           long horizon, int replications,
                                           std::mt19937_64& rng);

}  // namespace combine

#endif
