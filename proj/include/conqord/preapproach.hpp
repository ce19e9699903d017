#pragma once
// Single-reward baseline: bake fixed confidence annotations (0.9 / 0.1)
// into chosen/rejected comparisons, train one reward model on them, and
// drive PPO with that model as the only reward. Calibrates, but pays for it
// in answer quality.

#include <span>
#include <vector>

#include "conqord/env.hpp"
#include "conqord/metrics.hpp"
#include "conqord/ppo.hpp"
#include "conqord/reward_model.hpp"
#include "conqord/types.hpp"

namespace conqord {

struct AnnotatedTuple {
    enum class Label { chosen, rejected };
    TokenSeq prompt;
    TokenSeq response;  // answer tokens with the confidence token appended
    double annotated_confidence = 0.0;
    Label label = Label::chosen;
};

struct PreapproachComparison {
    AnnotatedTuple chosen;
    AnnotatedTuple rejected;
};

// Each input pair yields two comparisons: (good + high chosen vs good + low
// rejected) and (bad + low chosen vs bad + high rejected). The confidence is
// concatenated onto the response as its grid token.
std::vector<PreapproachComparison> build_preapproach_dataset(
    std::span<const PreferencePair> pairs, const EnvConfig& env,
    double high_confidence = 0.9, double low_confidence = 0.1);

// Text rendering of one annotated tuple in the prompt template.
std::string render_annotated_tuple(const AnnotatedTuple& tuple);

// Trains the single scorer over (prompt, response + confidence) with the
// ranking loss.
RmTrainResult train_preapproach_rm(std::span<const PreapproachComparison> comparisons,
                                   const RmTrainConfig& config, int prompt_vocab,
                                   int response_vocab);

struct PreapproachRunResult {
    RmTrainResult scorer;
    TrainResult train;
};

// Builds its own dataset, trains the scorer, and runs PPO with the scorer
// as the only reward (no quality/alignment composition). The gold
// correctness is never read during training, only in evaluation passes.
PreapproachRunResult run_preapproach(const Environment& env, const RewardConfig& rewards,
                                     const PPOConfig& ppo, const PolicyConfig& policy,
                                     const RmTrainConfig& rm, const MetricsConfig& metrics,
                                     int num_pairs);

}  // namespace conqord
