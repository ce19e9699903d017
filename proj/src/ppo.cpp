#include "conqord/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace conqord {

namespace {

// Substream purposes; combined with the iteration index where relevant.
constexpr std::uint64_t kStreamInitPolicy = 1;
constexpr std::uint64_t kStreamInitValue = 2;
constexpr std::uint64_t kStreamWarmStart = 3;
constexpr std::uint64_t kStreamRollout = 4;
constexpr std::uint64_t kStreamEval = 5;
constexpr std::uint64_t kStreamFinalEval = 6;

std::uint64_t stream_id(std::uint64_t purpose, std::uint64_t iteration) {
    return (purpose << 32) | iteration;
}

// Rebuilds the state the policy saw before emitting actions[t].
EpisodeState state_at(const Episode& episode, std::size_t t) {
    EpisodeState s;
    s.prompt_id = episode.prompt_id;
    s.emitted.assign(episode.actions.begin(),
                     episode.actions.begin() + static_cast<std::ptrdiff_t>(t));
    s.step = static_cast<int>(t);
    s.done = false;
    return s;
}

TokenSeq scoring_response(const Environment& env, const Episode& episode,
                          bool include_confidence_token) {
    if (episode.parsed.ok()) {
        TokenSeq resp{episode.parsed.answer};
        if (include_confidence_token) {
            resp.push_back(env.config().confidence_token(episode.parsed.confidence_level));
        }
        return resp;
    }
    return episode.actions;  // malformed: score what was emitted
}

}  // namespace

RolloutBatch collect_rollouts(const PolicyModel& policy, const ReferencePolicy& reference,
                              const ValueModel& value, const Environment& env,
                              const RolloutRewarder& rewarder, const RewardConfig& rewards,
                              int n, Rng& rng, ParseFailurePolicy parse_failure) {
    if (n < 2) throw std::invalid_argument("collect_rollouts: need n >= 2");
    if (rewarder.model == nullptr) {
        throw std::invalid_argument("collect_rollouts: no reward model supplied");
    }

    RolloutBatch batch;
    batch.episodes.reserve(static_cast<std::size_t>(n));

    for (int e = 0; e < n; ++e) {
        auto [state, gold] = env.reset(rng);
        Episode ep;
        ep.prompt_id = state.prompt_id;
        ep.gold = gold;
        bool done = false;
        while (!done) {
            ActionDist dist = policy.action_dist(state);
            ActionDist ref_dist = reference.model().action_dist(state);
            double v = value.value(state);
            Token action = policy.sample(dist, rng);
            ep.actions.push_back(action);
            ep.logprobs_policy.push_back(dist.logp[action]);
            ep.logprobs_reference.push_back(ref_dist.logp[action]);
            ep.values.push_back(v);
            auto [next, is_done] = env.step(state, action);
            state = std::move(next);
            done = is_done;
        }
        ep.parsed = env.parse_episode(ep.actions);
        ep.correct = env.judge(ep, gold);
        if (!ep.parsed.ok()) ++batch.parse_failures;
        ep.quality = rewarder.model->score(
            env.config().prompt_tokens(ep.prompt_id),
            scoring_response(env, ep, rewarder.include_confidence_token));
        batch.episodes.push_back(std::move(ep));
    }

    // Batch-level alignment over episodes with a usable confidence.
    if (rewarder.apply_alignment) {
        std::vector<std::size_t> members;
        std::vector<double> conf, qual;
        for (std::size_t i = 0; i < batch.episodes.size(); ++i) {
            const Episode& ep = batch.episodes[i];
            if (ep.parsed.ok()) {
                members.push_back(i);
                conf.push_back(ep.parsed.confidence);
                qual.push_back(ep.quality);
            } else if (parse_failure == ParseFailurePolicy::substitute) {
                members.push_back(i);
                conf.push_back(0.5);
                qual.push_back(ep.quality);
            }
        }
        if (!members.empty()) {
            std::vector<double> align =
                alignment_reward(conf, qual, rewards.normalize_alignment);
            for (std::size_t k = 0; k < members.size(); ++k) {
                batch.episodes[members[k]].alignment = align[k];
            }
        }
    }
    for (Episode& ep : batch.episodes) {
        ep.overall =
            ep.quality + (rewarder.apply_alignment ? rewards.alpha * ep.alignment : 0.0);
        ep.terminal_reward = ep.overall;
        // per-token divergence penalty; sequence reward on the final step
        ep.rewards.resize(ep.actions.size());
        for (std::size_t t = 0; t < ep.actions.size(); ++t) {
            ep.rewards[t] =
                -rewards.beta * (ep.logprobs_policy[t] - ep.logprobs_reference[t]);
        }
        ep.rewards.back() += ep.overall;
    }
    return batch;
}

void compute_advantages(RolloutBatch& batch, const PPOConfig& config) {
    for (Episode& ep : batch.episodes) {
        if (ep.values.size() != ep.rewards.size() || ep.rewards.empty()) {
            throw std::invalid_argument("compute_advantages: values missing");
        }
        const std::size_t T = ep.rewards.size();
        ep.raw_advantages.assign(T, 0.0);
        ep.returns.assign(T, 0.0);
        double next_adv = 0.0;
        double next_value = 0.0;  // value of the terminal state
        for (std::size_t t = T; t-- > 0;) {
            double delta = ep.rewards[t] + config.gamma * next_value - ep.values[t];
            next_adv = delta + config.gamma * config.gae_lambda * next_adv;
            ep.raw_advantages[t] = next_adv;
            next_value = ep.values[t];
        }
        for (std::size_t t = 0; t < T; ++t) {
            ep.returns[t] = ep.raw_advantages[t] + ep.values[t];
        }
        ep.advantages = ep.raw_advantages;
    }
    if (!config.normalize_advantages) return;

    double sum = 0.0, count = 0.0;
    for (const Episode& ep : batch.episodes) {
        for (double a : ep.raw_advantages) {
            sum += a;
            count += 1.0;
        }
    }
    if (count == 0.0) return;
    double mean = sum / count;
    double var = 0.0;
    for (const Episode& ep : batch.episodes) {
        for (double a : ep.raw_advantages) var += (a - mean) * (a - mean);
    }
    double std_dev = std::sqrt(var / count);
    for (Episode& ep : batch.episodes) {
        for (std::size_t t = 0; t < ep.advantages.size(); ++t) {
            ep.advantages[t] = (ep.raw_advantages[t] - mean) / (std_dev + 1e-8);
        }
    }
}

double clipped_surrogate(double logp_new, double logp_old, double advantage,
                         double clip_epsilon) {
    double ratio = std::exp(logp_new - logp_old);
    double clipped = std::clamp(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon);
    return std::min(ratio * advantage, clipped * advantage);
}

namespace {

struct BatchPass {
    double policy_objective = 0.0;  // mean clipped surrogate (maximized)
    double value_loss = 0.0;        // mean 0.5 (V - return)^2
    double entropy = 0.0;           // mean policy entropy
    double clip_fraction = 0.0;
    double loss = 0.0;              // combined minimized loss
};

// One forward (and optionally backward) pass of the PPO objective over the
// batch. Gradient buffers, when given, must be zeroed and sized.
BatchPass ppo_pass(const PolicyModel& policy, const ValueModel& value,
                   const RolloutBatch& batch, const PPOConfig& config,
                   std::vector<double>* grad_policy, std::vector<double>* grad_value) {
    std::size_t total_steps = 0;
    for (const Episode& ep : batch.episodes) {
        if (ep.advantages.size() != ep.actions.size() ||
            ep.returns.size() != ep.actions.size()) {
            throw std::invalid_argument("ppo: advantages not computed for batch");
        }
        total_steps += ep.actions.size();
    }
    if (total_steps == 0) throw std::invalid_argument("ppo: empty batch");
    const double inv_n = 1.0 / static_cast<double>(total_steps);
    const double eps = config.clip_epsilon;

    BatchPass out;
    std::size_t clipped_count = 0;
    for (const Episode& ep : batch.episodes) {
        for (std::size_t t = 0; t < ep.actions.size(); ++t) {
            EpisodeState state = state_at(ep, t);
            Token action = ep.actions[t];
            double logp_old = ep.logprobs_policy[t];
            double adv = ep.advantages[t];

            ActionDist dist = policy.action_dist(state);
            double logp_new = dist.logp[action];
            double ratio = std::exp(logp_new - logp_old);
            out.policy_objective += clipped_surrogate(logp_new, logp_old, adv, eps) * inv_n;
            out.entropy += dist.entropy * inv_n;
            if (std::abs(ratio - 1.0) > eps) ++clipped_count;

            double v = value.value(state);
            double verr = v - ep.returns[t];
            out.value_loss += 0.5 * verr * verr * inv_n;

            if (grad_policy != nullptr) {
                // d(surrogate)/dratio is the unclipped advantage unless the
                // active branch is flat.
                double dsdr;
                if (adv > 0.0) {
                    dsdr = ratio < 1.0 + eps ? adv : 0.0;
                } else if (adv < 0.0) {
                    dsdr = ratio > 1.0 - eps ? adv : 0.0;
                } else {
                    dsdr = 0.0;
                }
                double d_logp = -(dsdr * ratio) * inv_n;       // maximize surrogate
                double d_entropy = -config.entropy_coeff * inv_n;  // maximize entropy
                policy.backward(state, action, d_logp, d_entropy, *grad_policy);
            }
            if (grad_value != nullptr) {
                value.backward(state, config.value_coeff * verr * inv_n, *grad_value);
            }
        }
    }
    out.clip_fraction = static_cast<double>(clipped_count) / static_cast<double>(total_steps);
    out.loss = -out.policy_objective + config.value_coeff * out.value_loss -
               config.entropy_coeff * out.entropy;
    return out;
}

double batch_mean_kl(const RolloutBatch& batch) {
    double kl = 0.0;
    std::size_t steps = 0;
    for (const Episode& ep : batch.episodes) {
        for (std::size_t t = 0; t < ep.actions.size(); ++t) {
            kl += ep.logprobs_policy[t] - ep.logprobs_reference[t];
            ++steps;
        }
    }
    return steps == 0 ? 0.0 : kl / static_cast<double>(steps);
}

}  // namespace

double ppo_loss(const PolicyModel& policy, const ValueModel& value, const RolloutBatch& batch,
                const PPOConfig& config) {
    return ppo_pass(policy, value, batch, config, nullptr, nullptr).loss;
}

double ppo_loss_grad(const PolicyModel& policy, const ValueModel& value,
                     const RolloutBatch& batch, const PPOConfig& config,
                     std::vector<double>& grad_policy, std::vector<double>& grad_value) {
    grad_policy.assign(policy.param_count(), 0.0);
    grad_value.assign(value.param_count(), 0.0);
    return ppo_pass(policy, value, batch, config, &grad_policy, &grad_value).loss;
}

UpdateStats ppo_update(PolicyModel& policy, ValueModel& value, const RolloutBatch& batch,
                       const PPOConfig& config, AdamW& policy_opt, AdamW& value_opt) {
    UpdateStats stats;
    std::vector<double> grad_policy, grad_value;
    for (int pass = 0; pass < config.updates_per_minibatch; ++pass) {
        grad_policy.assign(policy.param_count(), 0.0);
        grad_value.assign(value.param_count(), 0.0);
        BatchPass result = ppo_pass(policy, value, batch, config, &grad_policy, &grad_value);
        if (!std::isfinite(result.loss)) {
            throw std::runtime_error(
                "ppo_update: non-finite loss (policy_objective=" +
                std::to_string(result.policy_objective) +
                ", value_loss=" + std::to_string(result.value_loss) +
                ", entropy=" + std::to_string(result.entropy) + ")");
        }
        if (pass == 0) {
            stats.policy_loss = -result.policy_objective;
            stats.value_loss = result.value_loss;
            stats.entropy = result.entropy;
            stats.clip_fraction = result.clip_fraction;
            stats.mean_kl = batch_mean_kl(batch);
        }
        policy_opt.step(policy.params, grad_policy);
        value_opt.step(value.params, grad_value);
    }
    return stats;
}

EvalResult evaluate_policy(const PolicyModel& policy, const Environment& env,
                           const RolloutRewarder& rewarder, int n, Rng& rng,
                           ParseFailurePolicy parse_failure) {
    if (n < 1) throw std::invalid_argument("evaluate_policy: need n >= 1");
    EvalResult result;
    result.episodes = n;
    for (int e = 0; e < n; ++e) {
        auto [state, gold] = env.reset(rng);
        Episode ep;
        ep.prompt_id = state.prompt_id;
        ep.gold = gold;
        bool done = false;
        while (!done) {
            ActionDist dist = policy.action_dist(state);
            Token action = policy.sample(dist, rng);
            ep.actions.push_back(action);
            auto [next, is_done] = env.step(state, action);
            state = std::move(next);
            done = is_done;
        }
        ep.parsed = env.parse_episode(ep.actions);
        ep.correct = env.judge(ep, gold);

        double confidence;
        if (ep.parsed.ok()) {
            confidence = ep.parsed.confidence;
        } else {
            ++result.parse_failures;
            if (parse_failure == ParseFailurePolicy::drop) continue;
            confidence = 0.5;
        }
        ScoredSample s;
        s.prompt_id = "e" + std::to_string(e) + "-p" + std::to_string(ep.prompt_id);
        s.prompt_tokens = env.config().prompt_tokens(ep.prompt_id);
        s.response_tokens = ep.actions;
        s.confidence = confidence;
        s.correct = ep.correct;
        if (rewarder.model != nullptr) {
            s.quality = rewarder.model->score(
                s.prompt_tokens,
                scoring_response(env, ep, rewarder.include_confidence_token));
        }
        result.samples.push_back(std::move(s));
    }
    return result;
}

namespace {

// Behavior cloning of the answer step toward the episode gold; optional
// warm start before the reference snapshot is taken.
void warm_start(PolicyModel& policy, const Environment& env, const PPOConfig& config,
                Rng& rng) {
    if (config.warm_start_steps <= 0) return;
    AdamW opt(policy.param_count(), config.learning_rate, config.weight_decay);
    std::vector<double> grad(policy.param_count(), 0.0);
    for (int step = 0; step < config.warm_start_steps; ++step) {
        std::fill(grad.begin(), grad.end(), 0.0);
        const double inv = 1.0 / static_cast<double>(config.batch_size);
        for (int b = 0; b < config.batch_size; ++b) {
            auto [state, gold] = env.reset(rng);
            // minimize -logp(gold | s0)
            policy.backward(state, gold, -inv, 0.0, grad);
        }
        opt.step(policy.params, grad);
    }
}

}  // namespace

TrainResult train(const Environment& env, const RolloutRewarder& rewarder,
                  const RewardConfig& rewards, const PPOConfig& config,
                  const PolicyConfig& policy_config, const MetricsConfig& metrics) {
    if (rewarder.model == nullptr) throw std::invalid_argument("train: no reward model");

    Rng init_policy_rng = Rng::substream(config.seed, stream_id(kStreamInitPolicy, 0));
    Rng init_value_rng = Rng::substream(config.seed, stream_id(kStreamInitValue, 0));
    PolicyModel policy = PolicyModel::init(env.config(), policy_config, init_policy_rng);
    ValueModel value = ValueModel::init(env.config(), policy_config, init_value_rng);

    Rng warm_rng = Rng::substream(config.seed, stream_id(kStreamWarmStart, 0));
    warm_start(policy, env, config, warm_rng);

    ReferencePolicy reference(policy);
    AdamW policy_opt(policy.param_count(), config.learning_rate, config.weight_decay);
    AdamW value_opt(value.param_count(), config.learning_rate, config.weight_decay);

    TrainResult result;
    result.log.reserve(static_cast<std::size_t>(config.total_iterations));

    for (int it = 0; it < config.total_iterations; ++it) {
        Rng eval_rng = Rng::substream(config.seed, stream_id(kStreamEval, it));
        EvalResult eval = evaluate_policy(policy, env, rewarder, config.eval_episodes,
                                          eval_rng, config.parse_failure);
        if (eval.samples.empty()) {
            throw std::runtime_error("train: evaluation pass produced no parseable samples");
        }
        std::vector<std::pair<double, bool>> pairs;
        pairs.reserve(eval.samples.size());
        for (const ScoredSample& s : eval.samples) pairs.emplace_back(s.confidence, *s.correct);
        double eval_ece = ece(pairs, metrics.n_bins, metrics.variant).ece;
        double eval_acc = accuracy(eval.samples);

        Rng rollout_rng = Rng::substream(config.seed, stream_id(kStreamRollout, it));
        RolloutBatch batch =
            collect_rollouts(policy, reference, value, env, rewarder, rewards,
                             config.batch_size, rollout_rng, config.parse_failure);
        compute_advantages(batch, config);
        UpdateStats stats = ppo_update(policy, value, batch, config, policy_opt, value_opt);

        IterationStats row;
        row.iteration = it;
        double q = 0.0, a = 0.0, o = 0.0;
        for (const Episode& ep : batch.episodes) {
            q += ep.quality;
            a += ep.alignment;
            o += ep.overall;
        }
        double bn = static_cast<double>(batch.episodes.size());
        row.mean_quality = q / bn;
        row.mean_alignment = a / bn;
        row.mean_overall = o / bn;
        row.mean_kl = stats.mean_kl;
        row.ece = eval_ece;
        row.accuracy = eval_acc;
        row.entropy = stats.entropy;
        row.clip_fraction = stats.clip_fraction;
        row.parse_failures = batch.parse_failures + eval.parse_failures;
        result.log.push_back(row);
    }

    Rng final_rng = Rng::substream(config.seed, stream_id(kStreamFinalEval, 0));
    EvalResult final_eval = evaluate_policy(policy, env, rewarder, config.final_eval_episodes,
                                            final_rng, config.parse_failure);
    if (final_eval.samples.empty()) {
        throw std::runtime_error("train: final evaluation produced no parseable samples");
    }
    result.final_samples = std::move(final_eval.samples);
    result.final_report = report(result.final_samples, metrics);
    result.policy = std::move(policy);
    result.value = std::move(value);
    result.reference = reference.model();
    return result;
}

}  // namespace conqord
