#ifndef COMBINE_ORCHESTRATOR_HPP
#define COMBINE_ORCHESTRATOR_HPP

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "combine/linear.hpp"
#include "combine/mab.hpp"
#include "combine/referee.hpp"
#include "combine/transition.hpp"

namespace combine {

enum class CbKind { LinUcb, LinTs };
enum class MabKind { DiscountedUcb, SoftmaxTransition };
enum class Pooling { PerUser, Common };

/// Configuration of one algorithm variant. use_reach = false bypasses the
/// candidate-subset mechanism (baseline combinations); forced_policy freezes
/// the referee for reduction testing.
struct VariantConfig {
    CbKind cb_kind = CbKind::LinUcb;
    MabKind mab_kind = MabKind::DiscountedUcb;
    Pooling pooling = Pooling::PerUser;
    bool use_reach = true;

    double alpha = 1.0;    // LinUCB exploration
    double alpha_b = 1.0;  // MAB exploration
    double gamma = 0.1;    // discounted mean step
    double delta_r = 0.5;  // referee step
    double alpha_s = 10.0; // preference step
    double v = 0.2;        // LinTS posterior scale

    std::optional<PolicyChoice> forced_policy;
};

/// Per-user mutable state: MAB arms, referee, indicators, transition
/// matrices and the current candidate subset.
struct UserAgentState {
    std::vector<MabArmState> mab_arms;
    RefereeState referee;
    IndicatorState indicators;
    AdjacencyMatrix adjacency;
    std::optional<PreferenceMatrix> preference;
    std::vector<int> candidates;
    bool ever_played = false;  // has the MAB_u acted for this user yet

    UserAgentState(int num_actions, const VariantConfig& cfg);
};

/// State shared across users: the global CB models and, for common-pooling
/// variants, the pooled transition matrices.
struct SharedAgentState {
    std::vector<LinearArmModel> cb_models;
    std::optional<AdjacencyMatrix> common_adj;
    std::optional<PreferenceMatrix> common_pref;

    SharedAgentState(int num_actions, int context_dim);
};

struct SelectResult {
    PolicyChoice chosen;
    int action;
    double pb_at_selection;
};

struct StepRecord {
    int user;
    int action;
    double reward;
    PolicyChoice policy;
    double pb_cb;
};

/// Referee-sample then base-policy selection: CB acts on the full action
/// set from the (possibly corrupted) context, MAB_u on the candidate subset.
SelectResult combine_select(UserAgentState& user, SharedAgentState& shared,
                            const Eigen::VectorXd& context, long t,
                            const VariantConfig& cfg, Rng& rng);

/// Post-reward bookkeeping, in pseudocode order: transition-matrix update
/// (pre-step a-), exclusive base-policy update, referee update, indicator
/// update, next candidate subset.
void combine_update(UserAgentState& user, SharedAgentState& shared,
                    const SelectResult& sel, const Eigen::VectorXd& context,
                    double reward, long t, const VariantConfig& cfg);

/// Refreshes pooled matrices from the per-user ones (common pooling only).
void refresh_pooled(std::vector<UserAgentState>& users,
                    SharedAgentState& shared, const VariantConfig& cfg);

/// One time step over all users in fixed index order; reward_fn(user, action)
/// supplies the environment feedback.
std::vector<StepRecord> run_round(
    std::vector<UserAgentState>& users, SharedAgentState& shared,
    const std::vector<Eigen::VectorXd>& contexts,
    const std::function<double(int, int)>& reward_fn, long t,
    const VariantConfig& cfg, Rng& rng);

}  // namespace combine

#endif
