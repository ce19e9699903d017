#include "conqord/env.hpp"

#include <cmath>
#include <stdexcept>

namespace conqord {

int EnvConfig::confidence_level_for(double confidence) const {
    if (!(confidence >= 0.0 && confidence <= 1.0)) {
        throw std::out_of_range("confidence_level_for: confidence outside [0,1]");
    }
    return static_cast<int>(std::lround(confidence * (confidence_levels - 1)));
}

double EnvConfig::ambiguity(int prompt) const {
    if (prompt < 0 || prompt >= num_prompts) {
        throw std::out_of_range("ambiguity: unknown prompt " + std::to_string(prompt));
    }
    if (!ambiguity_override.empty()) {
        return ambiguity_override[static_cast<std::size_t>(prompt)];
    }
    if (num_prompts == 1) return ambiguity_min;
    double f = static_cast<double>(prompt) / static_cast<double>(num_prompts - 1);
    return ambiguity_min + f * (ambiguity_max - ambiguity_min);
}

void EnvConfig::validate() const {
    if (num_prompts < 1) throw std::invalid_argument("env: num_prompts must be positive");
    if (num_answer_tokens < 2) throw std::invalid_argument("env: need >= 2 answer tokens");
    if (confidence_levels < 2) throw std::invalid_argument("env: need >= 2 confidence levels");
    if (t_max < 3) throw std::invalid_argument("env: t_max must be >= 3");
    if (!ambiguity_override.empty() &&
        ambiguity_override.size() != static_cast<std::size_t>(num_prompts)) {
        throw std::invalid_argument("env: ambiguity_override size mismatch");
    }
    for (int p = 0; p < num_prompts; ++p) {
        double a = ambiguity(p);
        if (!(a >= 0.0 && a <= 1.0)) {
            throw std::invalid_argument("env: ambiguity outside [0,1]");
        }
    }
}

Environment::Environment(EnvConfig config) : config_(std::move(config)) {
    config_.validate();
}

Environment::ResetResult Environment::reset_prompt(int prompt, Rng& rng) const {
    if (prompt < 0 || prompt >= config_.num_prompts) {
        throw std::out_of_range("reset_prompt: unknown prompt " + std::to_string(prompt));
    }
    double p = config_.ambiguity(prompt);
    Token gold = config_.primary_answer(prompt);
    if (p > 0.0 && rng.uniform() < p) gold = config_.alternate_answer(prompt);
    EpisodeState state;
    state.prompt_id = prompt;
    state.step = 0;
    state.done = false;
    return ResetResult{std::move(state), gold};
}

Environment::ResetResult Environment::reset(Rng& rng) const {
    int prompt = config_.num_prompts == 1
                     ? 0
                     : rng.uniform_int(0, config_.num_prompts - 1);
    return reset_prompt(prompt, rng);
}

std::pair<EpisodeState, bool> Environment::step(const EpisodeState& state,
                                                Token action) const {
    if (state.done) throw std::logic_error("step: episode already done");
    if (action < 0 || action >= config_.vocab_size()) {
        throw std::out_of_range("step: action token outside vocabulary");
    }
    EpisodeState next = state;
    next.emitted.push_back(action);
    next.step = state.step + 1;
    next.done = (action == config_.eos_token()) || (next.step >= config_.t_max);
    return {std::move(next), next.done};
}

ParsedEpisode Environment::parse_episode(const TokenSeq& actions) const {
    ParsedEpisode parsed;
    std::size_t answer_at = actions.size();
    for (std::size_t i = 0; i < actions.size(); ++i) {
        if (config_.is_answer_token(actions[i])) {
            parsed.answer = actions[i];
            answer_at = i;
            break;
        }
    }
    if (parsed.answer < 0) return parsed;
    for (std::size_t i = answer_at + 1; i < actions.size(); ++i) {
        if (config_.is_confidence_token(actions[i])) {
            parsed.confidence_level = config_.confidence_level_of(actions[i]);
            parsed.confidence = config_.confidence_value(parsed.confidence_level);
            break;
        }
    }
    return parsed;
}

bool Environment::judge(const Episode& episode, Token gold) const {
    if (!episode.parsed.ok()) return false;
    return episode.parsed.answer == gold;
}

double Environment::optimal_confidence(int prompt) const {
    double p = config_.ambiguity(prompt);  // throws on unknown prompt
    return std::max(1.0 - p, p);
}

std::vector<PreferencePair> make_preference_pairs(const Environment& env, int count,
                                                  Rng& rng) {
    if (count < 1) throw std::invalid_argument("make_preference_pairs: count must be positive");
    const EnvConfig& cfg = env.config();
    std::vector<PreferencePair> pairs;
    pairs.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        auto [state, gold] = env.reset(rng);
        Token rejected = rng.uniform_int(0, cfg.num_answer_tokens - 2);
        if (rejected >= gold) ++rejected;
        pairs.push_back(PreferencePair{cfg.prompt_tokens(state.prompt_id), {gold}, {rejected}});
    }
    return pairs;
}

std::vector<QaItem> Environment::qa_items() const {
    std::vector<QaItem> items;
    items.reserve(static_cast<std::size_t>(config_.num_prompts));
    for (int p = 0; p < config_.num_prompts; ++p) {
        QaItem item;
        item.prompt_id = "p" + std::to_string(p);
        item.question = std::to_string(p);
        item.gold_answer = std::to_string(config_.primary_answer(p));
        item.ambiguity = config_.ambiguity(p);
        items.push_back(std::move(item));
    }
    return items;
}

}  // namespace conqord
