#include "combine/linear.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace combine {

Eigen::VectorXd ridge_fit(const LinearArmModel& model) {
    Eigen::VectorXd mu = model.design.ldlt().solve(model.reward_acc);
    if (!mu.allFinite()) {
        throw std::runtime_error("ridge_fit: numerical failure");
    }
    return mu;
}

void linucb_update(LinearArmModel& model, const Eigen::VectorXd& context,
                   double reward) {
    if (context.size() != model.design.rows()) {
        throw std::invalid_argument("linucb_update: dimension mismatch");
    }
    model.design.noalias() += context * context.transpose();
    model.reward_acc.noalias() += reward * context;
}

int linucb_select(const Eigen::VectorXd& context,
                  const std::vector<LinearArmModel>& models, double alpha) {
    int best = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    for (size_t a = 0; a < models.size(); ++a) {
        const LinearArmModel& m = models[a];
        if (context.size() != m.design.rows()) {
            throw std::invalid_argument("linucb_select: dimension mismatch");
        }
        const auto ldlt = m.design.ldlt();
        const Eigen::VectorXd mu = ldlt.solve(m.reward_acc);
        const Eigen::VectorXd ainv_x = ldlt.solve(context);
        const double width = std::sqrt(std::max(0.0, context.dot(ainv_x)));
        const double score = context.dot(mu) + alpha * width;
        if (score > best_score) {
            best = static_cast<int>(a);
            best_score = score;
        }
    }
    return best;
}

int lints_select(const Eigen::VectorXd& context,
                 const std::vector<LinearArmModel>& models, double v, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    int best = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    for (size_t a = 0; a < models.size(); ++a) {
        const LinearArmModel& m = models[a];
        if (context.size() != m.design.rows()) {
            throw std::invalid_argument("lints_select: dimension mismatch");
        }
        const Eigen::LLT<Eigen::MatrixXd> llt(m.design);
        if (llt.info() != Eigen::Success) {
            throw std::runtime_error("lints_select: numerical failure");
        }
        Eigen::VectorXd mu = llt.solve(m.reward_acc);
        if (v > 0.0) {
            // A = L L^T, so L^{-T} z has covariance A^{-1}.
            Eigen::VectorXd z(m.dimension());
            for (int i = 0; i < z.size(); ++i) z(i) = normal(rng);
            mu.noalias() +=
                v * llt.matrixU().solve(z);
        }
        const double score = context.dot(mu);
        if (score > best_score) {
            best = static_cast<int>(a);
            best_score = score;
        }
    }
    return best;
}

}  // namespace combine
