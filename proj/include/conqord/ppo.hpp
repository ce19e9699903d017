#pragma once
// KL-penalized PPO over the toy environment. Rollouts carry per-step
// log-probabilities under the trained and reference policies; the composed
// sequence reward lands on the terminal step and the divergence penalty is
// shaped per token, so the per-step rewards of an episode sum exactly to
// the final reward. Advantages come from GAE(gamma, lambda), normalized per
// batch; the update is the clipped surrogate with value and entropy terms,
// one gradient step per mini-batch by default.

#include <cstdint>
#include <vector>

#include "conqord/env.hpp"
#include "conqord/metrics.hpp"
#include "conqord/optim.hpp"
#include "conqord/policy.hpp"
#include "conqord/reward_model.hpp"
#include "conqord/rewards.hpp"
#include "conqord/rng.hpp"

namespace conqord {

enum class ParseFailurePolicy { drop, substitute };  // substitute uses confidence 0.5

struct PPOConfig {
    int batch_size = 32;
    int updates_per_minibatch = 1;
    double clip_epsilon = 0.2;
    double gae_lambda = 0.95;
    double gamma = 1.0;
    double value_coeff = 0.5;
    double entropy_coeff = 0.01;
    double learning_rate = 0.01;
    double weight_decay = 0.1;
    int total_iterations = 300;
    // artifact knobs
    int eval_episodes = 256;
    int final_eval_episodes = 1024;
    int warm_start_steps = 0;
    bool normalize_advantages = true;
    std::uint64_t seed = 1;
    ParseFailurePolicy parse_failure = ParseFailurePolicy::drop;
};

// How rollouts are scored. CONQORD scores the parsed answer segment and
// composes quality with the batch alignment reward; the single-reward
// baseline scores answer + confidence token and skips the composition.
struct RolloutRewarder {
    const QualityRewardModel* model = nullptr;
    bool include_confidence_token = false;
    bool apply_alignment = true;
};

struct RolloutBatch {
    std::vector<Episode> episodes;
    int parse_failures = 0;
};

// n completed episodes with log-probs, values, parsed confidence,
// correctness, quality, batch alignment and overall rewards, and per-step
// shaped rewards. Throws when n < 2 (the alignment reward needs pairs).
RolloutBatch collect_rollouts(const PolicyModel& policy, const ReferencePolicy& reference,
                              const ValueModel& value, const Environment& env,
                              const RolloutRewarder& rewarder, const RewardConfig& rewards,
                              int n, Rng& rng, ParseFailurePolicy parse_failure);

// GAE advantages and returns; fills raw_advantages, advantages (normalized
// to zero mean / unit variance per batch when configured) and returns
// (= raw advantage + value).
void compute_advantages(RolloutBatch& batch, const PPOConfig& config);

// Per-sample clipped surrogate objective (the quantity PPO maximizes).
double clipped_surrogate(double logp_new, double logp_old, double advantage,
                         double clip_epsilon);

// Full PPO loss (policy surrogate + value + entropy terms) as a pure
// function of the current parameters; the finite-difference target.
double ppo_loss(const PolicyModel& policy, const ValueModel& value, const RolloutBatch& batch,
                const PPOConfig& config);

// Loss plus analytic gradients.
double ppo_loss_grad(const PolicyModel& policy, const ValueModel& value,
                     const RolloutBatch& batch, const PPOConfig& config,
                     std::vector<double>& grad_policy, std::vector<double>& grad_value);

struct UpdateStats {
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double mean_kl = 0.0;  // sampled estimate vs the reference policy
    double clip_fraction = 0.0;
};

// updates_per_minibatch clipped gradient steps; stats reflect the batch as
// collected. Throws on non-finite loss.
UpdateStats ppo_update(PolicyModel& policy, ValueModel& value, const RolloutBatch& batch,
                       const PPOConfig& config, AdamW& policy_opt, AdamW& value_opt);

struct EvalResult {
    std::vector<ScoredSample> samples;
    int parse_failures = 0;
    int episodes = 0;
};

// Rolls n episodes without gradients and scores them for calibration.
EvalResult evaluate_policy(const PolicyModel& policy, const Environment& env,
                           const RolloutRewarder& rewarder, int n, Rng& rng,
                           ParseFailurePolicy parse_failure);

// Training-log row; the calibration columns are measured on an evaluation
// pass of the policy before this iteration's update, so row 0 describes the
// untrained policy.
struct IterationStats {
    int iteration = 0;
    double mean_quality = 0.0;
    double mean_alignment = 0.0;
    double mean_overall = 0.0;
    double mean_kl = 0.0;
    double ece = 0.0;
    double accuracy = 0.0;
    double entropy = 0.0;
    double clip_fraction = 0.0;
    int parse_failures = 0;
};

struct TrainResult {
    PolicyModel policy;
    ValueModel value;
    PolicyModel reference;  // frozen snapshot taken at RL start
    std::vector<IterationStats> log;
    std::vector<ScoredSample> final_samples;
    CalibrationReport final_report;
};

// Full loop: optional behavior-cloning warm start, reference snapshot, then
// collect / advantages / update for total_iterations with a per-iteration
// evaluation pass and a larger final one.
TrainResult train(const Environment& env, const RolloutRewarder& rewarder,
                  const RewardConfig& rewards, const PPOConfig& config,
                  const PolicyConfig& policy_config, const MetricsConfig& metrics);

}  // namespace conqord
