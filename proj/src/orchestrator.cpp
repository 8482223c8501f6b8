#include "combine/orchestrator.hpp"

#include <numeric>
#include <stdexcept>

namespace combine {

namespace {

std::vector<int> full_action_set(int num_actions) {
    std::vector<int> all(static_cast<size_t>(num_actions));
    std::iota(all.begin(), all.end(), 0);
    return all;
}

/// Ranking/sampling matrix for the MAB_u: the preference matrix for softmax
/// variants, the count matrix otherwise; pooled when configured.
const Eigen::MatrixXd& transition_matrix(const UserAgentState& user,
                                         const SharedAgentState& shared,
                                         const VariantConfig& cfg) {
    if (cfg.mab_kind == MabKind::SoftmaxTransition) {
        if (cfg.pooling == Pooling::Common && shared.common_pref) {
            return shared.common_pref->prefs;
        }
        return user.preference->prefs;
    }
    if (cfg.pooling == Pooling::Common && shared.common_adj) {
        return shared.common_adj->counts;
    }
    return user.adjacency.counts;
}

}  // namespace

UserAgentState::UserAgentState(int num_actions, const VariantConfig& cfg)
    : mab_arms(static_cast<size_t>(num_actions)),
      adjacency(num_actions),
      candidates(full_action_set(num_actions)) {
    referee.step_size = cfg.delta_r;
    if (cfg.mab_kind == MabKind::SoftmaxTransition) {
        preference.emplace(num_actions, cfg.alpha_s);
    }
}

SharedAgentState::SharedAgentState(int num_actions, int context_dim) {
    cb_models.reserve(static_cast<size_t>(num_actions));
    for (int a = 0; a < num_actions; ++a) {
        cb_models.emplace_back(context_dim);
    }
}

SelectResult combine_select(UserAgentState& user, SharedAgentState& shared,
                            const Eigen::VectorXd& context, long t,
                            const VariantConfig& cfg, Rng& rng) {
    if (user.candidates.empty()) {
        throw std::logic_error("combine_select: empty candidate set");
    }
    const auto pb = referee_probabilities(user.referee);

    PolicyChoice chosen;
    if (cfg.forced_policy) {
        chosen = *cfg.forced_policy;
    } else {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        chosen = unit(rng) < pb[0] ? PolicyChoice::ContextualBandit
                                   : PolicyChoice::TransitionMab;
    }

    int action;
    if (chosen == PolicyChoice::ContextualBandit) {
        action = cfg.cb_kind == CbKind::LinUcb
                     ? linucb_select(context, shared.cb_models, cfg.alpha)
                     : lints_select(context, shared.cb_models, cfg.v, rng);
    } else if (cfg.mab_kind == MabKind::DiscountedUcb) {
        action = mab_select(user.mab_arms, user.candidates, t, cfg.alpha_b);
    } else if (user.indicators.previous.has_value()) {
        action = softmax_row_sample(transition_matrix(user, shared, cfg),
                                    *user.indicators.previous,
                                    user.candidates, rng);
    } else {
        // No previous indicator yet: preferences carry no row to condition
        // on, fall back to uniform over the candidates.
        std::uniform_int_distribution<size_t> pick(0, user.candidates.size() - 1);
        action = user.candidates[pick(rng)];
    }

    const double pb_chosen =
        chosen == PolicyChoice::ContextualBandit ? pb[0] : pb[1];
    return SelectResult{chosen, action, pb_chosen};
}

void combine_update(UserAgentState& user, SharedAgentState& shared,
                    const SelectResult& sel, const Eigen::VectorXd& context,
                    double reward, long t, const VariantConfig& cfg) {
    (void)t;
    // 1. Transition update with the pre-step previous indicator.
    adjacency_update(user.adjacency, user.indicators.previous, sel.action,
                     reward);
    if (user.preference && user.indicators.previous.has_value()) {
        preference_update(*user.preference, *user.indicators.previous,
                          sel.action, reward);
    }

    // 2. Exactly one base policy learns from this step.
    if (sel.chosen == PolicyChoice::ContextualBandit) {
        linucb_update(shared.cb_models[static_cast<size_t>(sel.action)],
                      context, reward);
    } else {
        MabArmState& arm = user.mab_arms[static_cast<size_t>(sel.action)];
        arm.mean_reward = discounted_mean_update(arm.mean_reward, reward,
                                                 cfg.gamma);
        arm.play_count += 1;
        user.ever_played = true;
    }

    // 3. Referee update with the captured selection-time probability.
    referee_update(user.referee, sel.chosen, reward, sel.pb_at_selection);

    // 4. Indicator update.
    indicator_update(user.indicators, sel.action, reward);

    // 5. Next candidate subset.
    if (cfg.use_reach) {
        user.candidates = adj_select(user.indicators,
                                     transition_matrix(user, shared, cfg),
                                     reward, user.ever_played);
    } else {
        user.candidates = full_action_set(user.adjacency.num_actions());
    }
}

void refresh_pooled(std::vector<UserAgentState>& users,
                    SharedAgentState& shared, const VariantConfig& cfg) {
    if (cfg.pooling != Pooling::Common || users.empty()) {
        return;
    }
    std::vector<AdjacencyMatrix> adjs;
    adjs.reserve(users.size());
    for (const auto& u : users) adjs.push_back(u.adjacency);
    shared.common_adj = common_adjacency(adjs);
    if (cfg.mab_kind == MabKind::SoftmaxTransition) {
        std::vector<PreferenceMatrix> prefs;
        prefs.reserve(users.size());
        for (const auto& u : users) prefs.push_back(*u.preference);
        shared.common_pref =
            common_preference(prefs, adjs, *shared.common_adj);
    }
}

std::vector<StepRecord> run_round(
    std::vector<UserAgentState>& users, SharedAgentState& shared,
    const std::vector<Eigen::VectorXd>& contexts,
    const std::function<double(int, int)>& reward_fn, long t,
    const VariantConfig& cfg, Rng& rng) {
    if (contexts.size() != users.size()) {
        throw std::invalid_argument("run_round: one context per user required");
    }
    std::vector<StepRecord> records;
    records.reserve(users.size());
    for (size_t i = 0; i < users.size(); ++i) {
        const auto pb = referee_probabilities(users[i].referee);
        const SelectResult sel =
            combine_select(users[i], shared, contexts[i], t, cfg, rng);
        const double r = reward_fn(static_cast<int>(i), sel.action);
        combine_update(users[i], shared, sel, contexts[i], r, t, cfg);
        records.push_back(StepRecord{static_cast<int>(i), sel.action, r,
                                     sel.chosen, pb[0]});
    }
    refresh_pooled(users, shared, cfg);
    return records;
}

}  // namespace combine
