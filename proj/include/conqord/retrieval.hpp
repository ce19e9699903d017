#pragma once
// Confidence-gated adaptive retrieval. The verbalized confidence decides
// whether to answer directly or invoke a synthetic retrieval oracle that
// fixes wrong answers with one probability and corrupts right ones with
// another. Threshold sweeps reuse one pre-rolled episode stream with
// pre-drawn oracle randomness, so rows differ only through the gate.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "conqord/env.hpp"
#include "conqord/policy.hpp"
#include "conqord/rng.hpp"

namespace conqord {

struct GateConfig {
    double threshold = 0.7;  // retrieve iff confidence < threshold (strict)
};

enum class GateDecision { self_answer, retrieve };

GateDecision gate(double confidence, const GateConfig& config);

struct RetrievalOracle {
    double help_prob_low = 0.8;  // P(incorrect answer gets fixed)
    double noise_prob = 0.2;     // P(correct answer gets corrupted)
    std::uint64_t seed = 0;
};

// One retrieval outcome drawn from the rng.
bool apply_oracle(bool correct_before, const RetrievalOracle& oracle, Rng& rng);
// Pure variant on pre-drawn uniforms; used for paired evaluation.
bool apply_oracle_u(bool correct_before, const RetrievalOracle& oracle, double u_help,
                    double u_noise);

struct GateOutcome {
    GateDecision decision = GateDecision::self_answer;
    bool final_correct = false;
};

// One episode of the paired stream: the policy's verbalized confidence and
// correctness plus this episode's frozen oracle draws.
struct PipelineEpisode {
    double confidence = 0.0;
    bool correct = false;
    double u_help = 0.0;
    double u_noise = 0.0;
};

// Rolls n episodes with the trained policy and freezes per-episode oracle
// randomness. Malformed episodes (possible only without the grammar mask)
// enter with confidence 0 and correct = false.
std::vector<PipelineEpisode> roll_pipeline_episodes(const PolicyModel& policy,
                                                    const Environment& env, int n,
                                                    std::uint64_t seed);

struct PipelineRow {
    double threshold = 0.0;
    int n_retrieved = 0;
    int n_self = 0;
    double acc_retrieved_bucket = 0.0;      // after the oracle
    double acc_retrieved_bucket_pre = 0.0;  // before the oracle
    double acc_self_bucket = 0.0;
    double acc_overall = 0.0;
    double acc_always_retrieve = 0.0;
    double acc_never_retrieve = 0.0;
};

PipelineRow evaluate_pipeline(std::span<const PipelineEpisode> episodes,
                              const GateConfig& config, const RetrievalOracle& oracle);

// Convenience matching the operation signature: rolls its own episodes.
PipelineRow evaluate_pipeline(const PolicyModel& policy, const Environment& env,
                              const GateConfig& config, const RetrievalOracle& oracle,
                              int n_episodes);

// One row per threshold over the identical episode stream.
std::vector<PipelineRow> sweep_thresholds(std::span<const PipelineEpisode> episodes,
                                          std::span<const double> grid,
                                          const RetrievalOracle& oracle);
std::vector<PipelineRow> sweep_thresholds(const PolicyModel& policy, const Environment& env,
                                          const RetrievalOracle& oracle,
                                          std::span<const double> grid, int n_episodes);

void write_retrieval_csv(const std::vector<PipelineRow>& rows,
                         const std::filesystem::path& path);

}  // namespace conqord
