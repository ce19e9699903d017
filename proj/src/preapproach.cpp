#include "conqord/preapproach.hpp"

#include <stdexcept>

#include "conqord/records.hpp"
#include "conqord/text_format.hpp"

namespace conqord {

namespace {

AnnotatedTuple make_tuple(const EnvConfig& env, const TokenSeq& prompt,
                          const TokenSeq& response, double confidence,
                          AnnotatedTuple::Label label) {
    AnnotatedTuple t;
    t.prompt = prompt;
    t.response = response;
    t.response.push_back(env.confidence_token(env.confidence_level_for(confidence)));
    t.annotated_confidence = confidence;
    t.label = label;
    return t;
}

}  // namespace

std::vector<PreapproachComparison> build_preapproach_dataset(
    std::span<const PreferencePair> pairs, const EnvConfig& env, double high_confidence,
    double low_confidence) {
    if (pairs.empty()) return {};
    using Label = AnnotatedTuple::Label;
    std::vector<PreapproachComparison> out;
    out.reserve(pairs.size() * 2);
    for (const PreferencePair& pair : pairs) {
        // good response: high confidence preferred over low
        out.push_back(PreapproachComparison{
            make_tuple(env, pair.prompt_tokens, pair.chosen_tokens, high_confidence,
                       Label::chosen),
            make_tuple(env, pair.prompt_tokens, pair.chosen_tokens, low_confidence,
                       Label::rejected)});
        // bad response: low confidence preferred over high
        out.push_back(PreapproachComparison{
            make_tuple(env, pair.prompt_tokens, pair.rejected_tokens, low_confidence,
                       Label::chosen),
            make_tuple(env, pair.prompt_tokens, pair.rejected_tokens, high_confidence,
                       Label::rejected)});
    }
    return out;
}

std::string render_annotated_tuple(const AnnotatedTuple& tuple) {
    TokenSeq answer(tuple.response.begin(), tuple.response.end() - 1);
    return format_prompt(tokens_to_string(tuple.prompt), tokens_to_string(answer),
                         tuple.annotated_confidence);
}

RmTrainResult train_preapproach_rm(std::span<const PreapproachComparison> comparisons,
                                   const RmTrainConfig& config, int prompt_vocab,
                                   int response_vocab) {
    if (comparisons.empty()) {
        throw std::invalid_argument("train_preapproach_rm: empty dataset");
    }
    std::vector<PreferencePair> pairs;
    pairs.reserve(comparisons.size());
    for (const PreapproachComparison& c : comparisons) {
        pairs.push_back(PreferencePair{c.chosen.prompt, c.chosen.response, c.rejected.response});
    }
    return train_quality_rm(pairs, config, prompt_vocab, response_vocab);
}

PreapproachRunResult run_preapproach(const Environment& env, const RewardConfig& rewards,
                                     const PPOConfig& ppo, const PolicyConfig& policy,
                                     const RmTrainConfig& rm, const MetricsConfig& metrics,
                                     int num_pairs) {
    Rng data_rng = Rng::substream(ppo.seed, 0x9A1Ful);
    std::vector<PreferencePair> pairs = make_preference_pairs(env, num_pairs, data_rng);
    std::vector<PreapproachComparison> dataset =
        build_preapproach_dataset(pairs, env.config());

    PreapproachRunResult result;
    result.scorer = train_preapproach_rm(dataset, rm, env.config().prompt_vocab(),
                                         env.config().vocab_size());

    RolloutRewarder rewarder;
    rewarder.model = &result.scorer.model;
    rewarder.include_confidence_token = true;
    rewarder.apply_alignment = false;
    result.train = train(env, rewarder, rewards, ppo, policy, metrics);
    return result;
}

}  // namespace conqord
