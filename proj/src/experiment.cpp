#include "conqord/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>

#include <json.hpp>

#include "conqord/csv.hpp"
#include "conqord/preapproach.hpp"
#include "conqord/records.hpp"

namespace conqord {

namespace {

using nlohmann::json;

constexpr const char* kToyScaleNote =
    "desk-scale synthetic environment; absolute metric values are not comparable "
    "to large-model benchmarks";

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create directory " + dir.string());
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::vector<ScoredSampleRecord> to_records(const std::vector<ScoredSample>& samples) {
    std::vector<ScoredSampleRecord> records;
    records.reserve(samples.size());
    for (const ScoredSample& s : samples) records.push_back(to_record(s));
    return records;
}

void write_table_csv(const RunRecord& record, const std::filesystem::path& path) {
    CsvWriter csv(path, {"row", "ece", "pearson", "pearson_p", "spearman", "spearman_p",
                         "accuracy"});
    for (const SeedRunResult& r : record.seed_results) {
        csv.row({"seed_" + std::to_string(r.seed), fmt_double(r.report.ece),
                 fmt_double(r.report.pearson.correlation), fmt_double(r.report.pearson.p_value),
                 fmt_double(r.report.spearman.correlation),
                 fmt_double(r.report.spearman.p_value), fmt_double(r.report.accuracy)});
    }
    auto agg = [&](const char* key, bool stddev) {
        const MetricAggregate& a = record.aggregate.at(key);
        return fmt_double(stddev ? a.stddev : a.mean);
    };
    csv.row({"mean", agg("ece", false), agg("pearson", false), agg("pearson_p", false),
             agg("spearman", false), agg("spearman_p", false), agg("accuracy", false)});
    csv.row({"std", agg("ece", true), agg("pearson", true), agg("pearson_p", true),
             agg("spearman", true), agg("spearman_p", true), agg("accuracy", true)});
    csv.close();
}

}  // namespace

RunMode parse_run_mode(const std::string& name) {
    if (name == "conqord") return RunMode::conqord;
    if (name == "preapproach") return RunMode::preapproach;
    if (name == "quality_only") return RunMode::quality_only;
    throw ConfigError("unknown run mode '" + name +
                      "' (expected conqord, preapproach or quality_only)");
}

const char* run_mode_name(RunMode mode) {
    switch (mode) {
        case RunMode::conqord: return "conqord";
        case RunMode::preapproach: return "preapproach";
        case RunMode::quality_only: return "quality_only";
    }
    return "unknown";
}

RmCmdResult cmd_train_rm(const ExperimentConfig& config) {
    ensure_dir(config.output_dir);
    Environment env(config.env);

    Rng data_rng = Rng::substream(config.rm.seed, 0xDA7Aull);
    std::vector<PreferencePair> pairs = make_preference_pairs(env, config.rm_num_pairs, data_rng);

    std::vector<PreferencePairRecord> records;
    records.reserve(pairs.size());
    for (const PreferencePair& p : pairs) records.push_back(to_record(p));
    write_preference_pairs(records, config.output_dir / "preference_pairs.jsonl");
    write_qa_items(env.qa_items(), config.output_dir / "qa_items.jsonl");

    RmCmdResult result;
    result.train = train_quality_rm(pairs, config.rm, config.env.prompt_vocab(),
                                    config.env.vocab_size());
    result.checkpoint = config.rm_checkpoint_path();
    ensure_dir(result.checkpoint.parent_path());
    save_reward_model(result.train.model, result.checkpoint);

    CsvWriter csv(config.output_dir / "rm_metrics.csv",
                  {"epoch", "mean_loss", "holdout_accuracy"});
    for (std::size_t e = 0; e < result.train.epoch_losses.size(); ++e) {
        csv.row({std::to_string(e), fmt_double(result.train.epoch_losses[e]),
                 fmt_double(result.train.epoch_holdout_accuracy[e])});
    }
    csv.close();
    std::cout << "train-rm: " << pairs.size() << " pairs, held-out ranking accuracy "
              << result.train.holdout_accuracy << ", checkpoint "
              << result.checkpoint.string() << "\n";
    return result;
}

void write_training_log_csv(const std::vector<IterationStats>& log,
                            const std::filesystem::path& path) {
    CsvWriter csv(path, {"iteration", "mean_quality", "mean_alignment", "mean_overall",
                         "mean_kl", "ece", "accuracy", "entropy", "clip_fraction"});
    for (const IterationStats& row : log) {
        csv.row({std::to_string(row.iteration), fmt_double(row.mean_quality),
                 fmt_double(row.mean_alignment), fmt_double(row.mean_overall),
                 fmt_double(row.mean_kl), fmt_double(row.ece), fmt_double(row.accuracy),
                 fmt_double(row.entropy), fmt_double(row.clip_fraction)});
    }
    csv.close();
}

void write_run_record_json(const RunRecord& record, const std::filesystem::path& path) {
    json seeds = json::array();
    for (const SeedRunResult& r : record.seed_results) {
        seeds.push_back(json{{"seed", r.seed},
                             {"ece", r.report.ece},
                             {"pearson", r.report.pearson.correlation},
                             {"pearson_p", r.report.pearson.p_value},
                             {"spearman", r.report.spearman.correlation},
                             {"spearman_p", r.report.spearman.p_value},
                             {"accuracy", r.report.accuracy},
                             {"n_samples", r.report.n_samples},
                             {"initial_ece", r.initial_ece},
                             {"initial_accuracy", r.initial_accuracy}});
    }
    json agg = json::object();
    for (const auto& [key, a] : record.aggregate) {
        agg[key] = json{{"mean", a.mean}, {"std", a.stddev}};
    }
    json j{{"mode", record.mode},
           {"config", record.config_snapshot},
           {"seeds", seeds},
           {"aggregate", agg},
           {"wall_clock_seconds", record.wall_clock_seconds},
           {"note", record.note}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
}

RunRecord cmd_run(const ExperimentConfig& config, RunMode mode) {
    auto started = std::chrono::steady_clock::now();
    ensure_dir(config.output_dir);
    Environment env(config.env);
    write_qa_items(env.qa_items(), config.output_dir / "qa_items.jsonl");

    QualityRewardModel rm;
    if (mode != RunMode::preapproach) {
        std::filesystem::path ckpt = config.rm_checkpoint_path();
        if (!std::filesystem::exists(ckpt)) {
            throw std::runtime_error("missing reward-model checkpoint " + ckpt.string() +
                                     " (run train-rm first)");
        }
        rm = load_reward_model(ckpt);
    }

    RewardConfig rewards = config.reward;
    if (mode == RunMode::quality_only) rewards.alpha = 0.0;

    RunRecord record;
    record.mode = run_mode_name(mode);
    record.config_snapshot = config.raw.entries();
    record.note = kToyScaleNote;

    for (std::uint64_t seed : config.seeds) {
        PPOConfig ppo = config.ppo;
        ppo.seed = seed;

        TrainResult result;
        if (mode == RunMode::preapproach) {
            PreapproachRunResult pr =
                run_preapproach(env, rewards, ppo, config.policy, config.rm, config.metrics,
                                config.rm_num_pairs);
            result = std::move(pr.train);
        } else {
            RolloutRewarder rewarder;
            rewarder.model = &rm;
            rewarder.include_confidence_token = false;
            rewarder.apply_alignment = true;
            result = train(env, rewarder, rewards, ppo, config.policy, config.metrics);
        }

        std::filesystem::path seed_dir =
            config.output_dir / ("seed_" + std::to_string(seed));
        ensure_dir(seed_dir);
        write_training_log_csv(result.log, seed_dir / "training_log.csv");
        write_report_csv(result.final_report, seed_dir / "report.csv");
        write_bins_csv(result.final_report.bins, seed_dir / "bins.csv");
        write_scored_samples(to_records(result.final_samples),
                             seed_dir / "scored_samples.jsonl");
        save_policy(result.policy, seed_dir / "policy.json");

        SeedRunResult sr;
        sr.seed = seed;
        sr.report = result.final_report;
        if (!result.log.empty()) {
            sr.initial_ece = result.log.front().ece;
            sr.initial_accuracy = result.log.front().accuracy;
        }
        record.seed_results.push_back(std::move(sr));
    }

    auto collect = [&](auto&& get) {
        std::vector<double> v;
        v.reserve(record.seed_results.size());
        for (const SeedRunResult& r : record.seed_results) v.push_back(get(r));
        return v;
    };
    auto add_aggregate = [&](const char* key, std::vector<double> v) {
        record.aggregate[key] = MetricAggregate{mean_of(v), sample_std(v)};
    };
    add_aggregate("ece", collect([](const SeedRunResult& r) { return r.report.ece; }));
    add_aggregate("pearson",
                  collect([](const SeedRunResult& r) { return r.report.pearson.correlation; }));
    add_aggregate("pearson_p",
                  collect([](const SeedRunResult& r) { return r.report.pearson.p_value; }));
    add_aggregate("spearman",
                  collect([](const SeedRunResult& r) { return r.report.spearman.correlation; }));
    add_aggregate("spearman_p",
                  collect([](const SeedRunResult& r) { return r.report.spearman.p_value; }));
    add_aggregate("accuracy",
                  collect([](const SeedRunResult& r) { return r.report.accuracy; }));

    record.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    write_table_csv(record, config.output_dir / "table.csv");
    write_run_record_json(record, config.output_dir / "run_record.json");

    std::cout << "run mode=" << record.mode << " (" << kToyScaleNote << ")\n"
              << "  ece " << record.aggregate.at("ece").mean << " +/- "
              << record.aggregate.at("ece").stddev << ", accuracy "
              << record.aggregate.at("accuracy").mean << " +/- "
              << record.aggregate.at("accuracy").stddev << " over "
              << record.seed_results.size() << " seeds\n";
    return record;
}

std::vector<AlphaRow> cmd_sweep_alpha(const ExperimentConfig& config) {
    std::vector<double> grid = config.alpha_grid;
    std::set<double> unique(grid.begin(), grid.end());
    if (unique.size() != grid.size()) {
        throw ConfigError("sweep.alpha_grid contains duplicate values");
    }
    std::sort(grid.begin(), grid.end());

    ensure_dir(config.output_dir);
    std::vector<AlphaRow> rows;
    for (double alpha : grid) {
        ExperimentConfig sub = config;
        sub.raw.set("reward.alpha", fmt_double(alpha));
        sub.reward.alpha = alpha;
        sub.output_dir = config.output_dir / ("alpha_" + fmt_double(alpha));
        sub.raw.set("io.output_dir", sub.output_dir.string());
        // the reward-model checkpoint stays shared across the sweep
        sub.rm_checkpoint = config.rm_checkpoint_path().string();
        sub.raw.set("io.rm_checkpoint", sub.rm_checkpoint);
        RunRecord record = cmd_run(sub, RunMode::conqord);
        rows.push_back(AlphaRow{alpha, record.aggregate.at("ece").mean,
                                record.aggregate.at("accuracy").mean});
    }

    CsvWriter csv(config.output_dir / "alpha_sweep.csv", {"alpha", "ece", "accuracy"});
    for (const AlphaRow& r : rows) {
        csv.row({fmt_double(r.alpha), fmt_double(r.ece), fmt_double(r.accuracy)});
    }
    csv.close();
    return rows;
}

std::vector<PipelineRow> cmd_retrieval(const ExperimentConfig& config) {
    ensure_dir(config.output_dir);
    std::filesystem::path ckpt = config.policy_checkpoint_path();
    if (!std::filesystem::exists(ckpt)) {
        throw std::runtime_error("missing policy checkpoint " + ckpt.string() +
                                 " (run `run` first)");
    }
    PolicyModel policy = load_policy(ckpt);
    Environment env(config.env);
    if (policy.num_prompts != config.env.num_prompts ||
        policy.num_answer_tokens != config.env.num_answer_tokens ||
        policy.confidence_levels != config.env.confidence_levels) {
        throw std::runtime_error("policy checkpoint does not match the environment layout");
    }

    std::vector<PipelineRow> rows =
        sweep_thresholds(policy, env, config.oracle, config.retrieval_grid,
                         config.retrieval_episodes);
    write_retrieval_csv(rows, config.output_dir / "retrieval.csv");
    return rows;
}

void cmd_judge_offline(const std::filesystem::path& samples_file,
                       const std::filesystem::path& ratings_file,
                       const std::filesystem::path& output_file) {
    std::vector<ScoredSampleRecord> samples = read_scored_samples(samples_file);

    std::ifstream in(ratings_file);
    if (!in) throw RecordError(0, "cannot open " + ratings_file.string());
    std::map<std::string, double> ratings;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw RecordError(line_no, "line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!j.contains("prompt_id") || !j.contains("rating")) {
            throw RecordError(line_no, "line " + std::to_string(line_no) +
                                           ": expected {prompt_id, rating}");
        }
        std::string id = j.at("prompt_id").get<std::string>();
        double rating = j.at("rating").get<double>();
        if (rating != 0.0 && rating != 1.0) {
            throw RecordError(line_no, "line " + std::to_string(line_no) + ": rating " +
                                           fmt_double(rating) + " is not 0.0 or 1.0");
        }
        if (!ratings.emplace(id, rating).second) {
            throw RecordError(line_no, "duplicate rating for prompt_id '" + id + "'");
        }
    }

    std::set<std::string> seen;
    for (ScoredSampleRecord& s : samples) {
        if (!seen.insert(s.prompt_id).second) {
            throw RecordError(0, "duplicate prompt_id '" + s.prompt_id + "' in samples");
        }
        auto it = ratings.find(s.prompt_id);
        if (it == ratings.end()) {
            throw RecordError(0, "no rating for prompt_id '" + s.prompt_id + "'");
        }
        s.correct = it->second == 1.0;
        ratings.erase(it);
    }
    if (!ratings.empty()) {
        throw RecordError(0, "rating for unknown prompt_id '" + ratings.begin()->first + "'");
    }
    write_scored_samples(samples, output_file);
}

CalibrationReport cmd_report(const std::filesystem::path& samples_file,
                             const MetricsConfig& metrics,
                             const std::filesystem::path& output_dir) {
    ensure_dir(output_dir);
    std::vector<ScoredSampleRecord> records = read_scored_samples(samples_file);
    std::vector<ScoredSample> samples;
    samples.reserve(records.size());
    for (const ScoredSampleRecord& r : records) samples.push_back(from_record(r));
    CalibrationReport rep = report(samples, metrics);
    write_report_csv(rep, output_dir / "report.csv");
    write_bins_csv(rep.bins, output_dir / "bins.csv");
    return rep;
}

}  // namespace conqord
