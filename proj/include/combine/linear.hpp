#ifndef COMBINE_LINEAR_HPP
#define COMBINE_LINEAR_HPP

#include <Eigen/Dense>
#include <random>
#include <vector>

namespace combine {

using Rng = std::mt19937_64;

/// Per-action ridge-regression model with incremental rank-1 updates.
/// design starts as the identity, which realizes the ridge constant k = 1.
struct LinearArmModel {
    Eigen::MatrixXd design;      // A_a = D^T D + I
    Eigen::VectorXd reward_acc;  // b_a

    explicit LinearArmModel(int dimension)
        : design(Eigen::MatrixXd::Identity(dimension, dimension)),
          reward_acc(Eigen::VectorXd::Zero(dimension)) {}

    int dimension() const { return static_cast<int>(design.rows()); }
};

/// Solves A mu = b for the coefficient estimate.
Eigen::VectorXd ridge_fit(const LinearArmModel& model);

/// A += x x^T, b += r x.
void linucb_update(LinearArmModel& model, const Eigen::VectorXd& context,
                   double reward);

/// argmax_a x^T mu_a + alpha * sqrt(x^T A_a^{-1} x), ties to lowest index.
int linucb_select(const Eigen::VectorXd& context,
                  const std::vector<LinearArmModel>& models, double alpha);

/// Thompson sampling on the Gaussian posterior N(mu_a, v^2 A_a^{-1});
/// returns argmax_a x^T mu~_a. v = 0 degenerates to the greedy argmax.
int lints_select(const Eigen::VectorXd& context,
                 const std::vector<LinearArmModel>& models, double v, Rng& rng);

}  // namespace combine

#endif
