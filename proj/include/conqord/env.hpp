#pragma once
// Toy verbalized-QA environment. An episode is a short MDP rollout over an
// opaque vocabulary: one answer token, one confidence token, one
// end-of-sequence token (t_max default 3). Each prompt has a 2-candidate
// answer set; with per-prompt ambiguity p the episode's gold answer is
// resampled to the alternate candidate with probability p, which makes the
// calibration target analytically exact: the best reachable accuracy on a
// prompt is max(1-p, p).

#include <cstdint>
#include <utility>
#include <vector>

#include "conqord/rng.hpp"
#include "conqord/types.hpp"

namespace conqord {

struct EnvConfig {
    int num_prompts = 64;
    int num_answer_tokens = 16;  // K
    int confidence_levels = 11;  // grid 0.0, 0.1, ..., 1.0
    int t_max = 3;
    double ambiguity_min = 0.0;  // linear ramp across prompts...
    double ambiguity_max = 0.5;
    std::vector<double> ambiguity_override;  // ...unless given explicitly
    std::uint64_t seed = 0;

    int vocab_size() const { return num_answer_tokens + confidence_levels + 1; }
    Token eos_token() const { return num_answer_tokens + confidence_levels; }
    bool is_answer_token(Token t) const { return t >= 0 && t < num_answer_tokens; }
    bool is_confidence_token(Token t) const {
        return t >= num_answer_tokens && t < num_answer_tokens + confidence_levels;
    }
    Token confidence_token(int level) const { return num_answer_tokens + level; }
    int confidence_level_of(Token t) const {
        return is_confidence_token(t) ? t - num_answer_tokens : -1;
    }
    double confidence_value(int level) const {
        return static_cast<double>(level) / static_cast<double>(confidence_levels - 1);
    }
    // nearest grid level for a confidence in [0,1]
    int confidence_level_for(double confidence) const;

    double ambiguity(int prompt) const;
    // Prompts are binned onto answer tokens in schedule order, so prompts of
    // similar ambiguity share a primary token and the token identity carries
    // a consistent quality signal (the stand-in for quality being legible in
    // the response text).
    Token primary_answer(int prompt) const {
        return static_cast<int>((static_cast<long long>(prompt) * num_answer_tokens) /
                                num_prompts);
    }
    Token alternate_answer(int prompt) const {
        return (primary_answer(prompt) + 1) % num_answer_tokens;
    }

    // Prompt surface form fed to the reward model: an identity token plus a
    // shared difficulty-band marker (prompts of similar ambiguity look
    // similar, as harder questions do in natural data).
    int prompt_vocab() const { return num_prompts + num_answer_tokens; }
    TokenSeq prompt_tokens(int prompt) const {
        return TokenSeq{prompt, num_prompts + primary_answer(prompt)};
    }

    void validate() const;
};

struct EpisodeState {
    int prompt_id = -1;
    TokenSeq emitted;
    int step = 0;
    bool done = false;
};

// Token-level reading of an episode: first answer-range token, then the
// first confidence-range token after it.
struct ParsedEpisode {
    Token answer = -1;
    int confidence_level = -1;
    double confidence = 0.0;
    bool ok() const { return answer >= 0 && confidence_level >= 0; }
};

struct Episode {
    int prompt_id = -1;
    TokenSeq actions;
    std::vector<double> logprobs_policy;
    std::vector<double> logprobs_reference;
    std::vector<double> values;
    ParsedEpisode parsed;
    Token gold = -1;
    bool correct = false;
    double quality = 0.0;
    double alignment = 0.0;
    double overall = 0.0;
    double terminal_reward = 0.0;  // sequence-level reward, attached at the final step
    // filled by the PPO pipeline
    std::vector<double> rewards;
    std::vector<double> raw_advantages;
    std::vector<double> advantages;
    std::vector<double> returns;
};

class Environment {
public:
    explicit Environment(EnvConfig config);

    struct ResetResult {
        EpisodeState state;
        Token gold;  // this episode's gold answer token
    };

    // Uniformly samples a prompt and draws this episode's gold answer.
    ResetResult reset(Rng& rng) const;
    // Same, with the prompt fixed (tests and paired evaluation).
    ResetResult reset_prompt(int prompt, Rng& rng) const;

    // Appends the action; done on end-of-sequence or when step reaches
    // t_max. Throws std::logic_error when called on a done state.
    std::pair<EpisodeState, bool> step(const EpisodeState& state, Token action) const;

    ParsedEpisode parse_episode(const TokenSeq& actions) const;

    // Exact match of the parsed answer token against the episode gold;
    // malformed episodes judge false.
    bool judge(const Episode& episode, Token gold) const;

    // max(1-p, p): the accuracy of the best answering policy on the prompt,
    // i.e. the confidence a perfectly calibrated optimal policy verbalizes.
    double optimal_confidence(int prompt) const;

    std::vector<QaItem> qa_items() const;

    const EnvConfig& config() const { return config_; }

private:
    EnvConfig config_;
};

// Synthetic preference data: each pair rolls one episode-level gold draw as
// the chosen response and a uniform non-gold answer token as the rejected
// one, so the chosen/rejected margin of a prompt reflects its ambiguity.
std::vector<PreferencePair> make_preference_pairs(const Environment& env, int count, Rng& rng);

}  // namespace conqord
