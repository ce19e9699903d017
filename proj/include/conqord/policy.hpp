#pragma once
// Actor and critic for the toy environment. Both condition on the prompt
// embedding, a step one-hot and the mean embedding of tokens emitted so far,
// through a 2-layer tanh perceptron. The policy head produces logits over
// the vocabulary; the grammar mask restricts step 0 to answer tokens, step 1
// to confidence tokens and later steps to end-of-sequence, with masked
// tokens at probability exactly 0.

#include <filesystem>
#include <vector>

#include "conqord/env.hpp"
#include "conqord/rng.hpp"
#include "conqord/types.hpp"

namespace conqord {

struct PolicyConfig {
    int feature_dim = 8;
    int hidden_dim = 32;
    bool grammar_mask = true;
};

struct ActionDist {
    std::vector<double> logp;   // full vocab; -inf on masked tokens
    std::vector<double> probs;  // 0 on masked tokens
    double entropy = 0.0;
};

struct PolicyModel {
    int num_prompts = 0;
    int num_answer_tokens = 0;   // token-role layout, copied from the env
    int confidence_levels = 0;
    int t_max = 0;
    int feature_dim = 0;
    int hidden_dim = 0;
    bool grammar_mask = true;
    std::vector<double> params;  // [E_prompt | E_token | W1 | b1 | W2 | b2]

    static PolicyModel init(const EnvConfig& env, const PolicyConfig& config, Rng& rng);

    int vocab() const { return num_answer_tokens + confidence_levels + 1; }
    Token eos_token() const { return num_answer_tokens + confidence_levels; }

    std::size_t param_count() const;
    std::vector<bool> legal_actions(int step) const;
    ActionDist action_dist(const EpisodeState& state) const;
    Token sample(const ActionDist& dist, Rng& rng) const;

    // Accumulates gradients of d_logp_a * logp(action) + d_entropy * H into
    // grad (buffer sized param_count()).
    void backward(const EpisodeState& state, Token action, double d_logp_a, double d_entropy,
                  std::vector<double>& grad) const;
};

// Frozen snapshot of the policy at RL start; read-only during training.
class ReferencePolicy {
public:
    explicit ReferencePolicy(PolicyModel snapshot) : model_(std::move(snapshot)) {}
    const PolicyModel& model() const { return model_; }

private:
    PolicyModel model_;
};

struct ValueModel {
    int num_prompts = 0;
    int vocab = 0;
    int t_max = 0;
    int feature_dim = 0;
    int hidden_dim = 0;
    std::vector<double> params;

    static ValueModel init(const EnvConfig& env, const PolicyConfig& config, Rng& rng);

    std::size_t param_count() const;
    double value(const EpisodeState& state) const;
    void backward(const EpisodeState& state, double dvalue, std::vector<double>& grad) const;
};

void save_policy(const PolicyModel& model, const std::filesystem::path& path);
PolicyModel load_policy(const std::filesystem::path& path);

}  // namespace conqord
