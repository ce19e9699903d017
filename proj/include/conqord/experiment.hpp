#pragma once
// Experiment commands behind the CLI: reward-model training, the three run
// modes, the alpha sweep, the retrieval sweep, the offline judge protocol
// and report emission. Every command writes deterministic CSV bodies;
// wall-clock lives in the JSON record only.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "conqord/config.hpp"
#include "conqord/metrics.hpp"
#include "conqord/ppo.hpp"
#include "conqord/retrieval.hpp"
#include "conqord/reward_model.hpp"

namespace conqord {

enum class RunMode { conqord, preapproach, quality_only };

// Throws ConfigError on an unknown mode string.
RunMode parse_run_mode(const std::string& name);
const char* run_mode_name(RunMode mode);

struct RmCmdResult {
    RmTrainResult train;
    std::filesystem::path checkpoint;
};

// Generates the synthetic preference dataset, trains the quality reward
// model, and writes checkpoint + dataset + metrics CSV under output_dir.
RmCmdResult cmd_train_rm(const ExperimentConfig& config);

struct SeedRunResult {
    std::uint64_t seed = 0;
    CalibrationReport report;       // final evaluation
    double initial_ece = 0.0;       // untrained policy, training-log row 0
    double initial_accuracy = 0.0;
};

struct MetricAggregate {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation
};

struct RunRecord {
    std::string mode;
    std::map<std::string, std::string> config_snapshot;
    std::vector<SeedRunResult> seed_results;
    std::map<std::string, MetricAggregate> aggregate;
    double wall_clock_seconds = 0.0;
    std::string note;
};

// Per-seed train + evaluate; writes seed-scoped artifacts, the aggregate
// table CSV and the run record JSON. quality_only runs the same pipeline
// with alpha forced to 0.
RunRecord cmd_run(const ExperimentConfig& config, RunMode mode);

struct AlphaRow {
    double alpha = 0.0;
    double ece = 0.0;       // mean over seeds
    double accuracy = 0.0;  // mean over seeds
};

// One cmd_run per grid value with shared seeds; rejects duplicate alphas.
std::vector<AlphaRow> cmd_sweep_alpha(const ExperimentConfig& config);

// Threshold sweep for a trained policy checkpoint.
std::vector<PipelineRow> cmd_retrieval(const ExperimentConfig& config);

// Joins external {prompt_id, rating} lines onto a scored-samples file,
// setting correct := (rating == 1.0). Ratings must be exactly 0.0 or 1.0
// and ids must match one-to-one.
void cmd_judge_offline(const std::filesystem::path& samples_file,
                       const std::filesystem::path& ratings_file,
                       const std::filesystem::path& output_file);

// Calibration report for an already-judged scored-samples file.
CalibrationReport cmd_report(const std::filesystem::path& samples_file,
                             const MetricsConfig& metrics,
                             const std::filesystem::path& output_dir);

void write_training_log_csv(const std::vector<IterationStats>& log,
                            const std::filesystem::path& path);
void write_run_record_json(const RunRecord& record, const std::filesystem::path& path);

}  // namespace conqord
