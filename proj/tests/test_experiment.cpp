#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "conqord/experiment.hpp"
#include "conqord/records.hpp"

using namespace conqord;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "conqord_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// tiny but complete experiment configuration
ExperimentConfig tiny_config(const fs::path& out) {
    KeyValueConfig kv = KeyValueConfig::defaults();
    kv.set("env.num_prompts", "6");
    kv.set("env.num_answer_tokens", "4");
    kv.set("rm.num_pairs", "150");
    kv.set("rm.epochs", "3");
    kv.set("ppo.total_iterations", "4");
    kv.set("ppo.batch_size", "8");
    kv.set("ppo.eval_episodes", "24");
    kv.set("ppo.final_eval_episodes", "48");
    kv.set("retrieval.episodes", "200");
    kv.set("run.seeds", "1,2");
    kv.set("io.output_dir", out.string());
    return ExperimentConfig::from_kv(kv);
}

}  // namespace

TEST_CASE("run mode parsing") {
    CHECK(parse_run_mode("conqord") == RunMode::conqord);
    CHECK(parse_run_mode("preapproach") == RunMode::preapproach);
    CHECK(parse_run_mode("quality_only") == RunMode::quality_only);
    CHECK_THROWS_AS(parse_run_mode("vanilla"), ConfigError);
}

TEST_CASE("judge-offline joins ratings by prompt id") {
    fs::path dir = fresh_dir("judge");
    fs::path samples = dir / "samples.jsonl";
    fs::path ratings = dir / "ratings.jsonl";
    fs::path out = dir / "judged.jsonl";

    std::vector<ScoredSampleRecord> records;
    for (int i = 0; i < 3; ++i) {
        ScoredSampleRecord r;
        r.prompt_id = "s" + std::to_string(i);
        r.response = "1";
        r.confidence = 0.5;
        r.quality = 0.0;
        records.push_back(r);
    }
    write_scored_samples(records, samples);

    SUBCASE("all ratings 1.0 mark everything correct") {
        std::ofstream rt(ratings);
        for (int i = 0; i < 3; ++i) {
            rt << R"({"prompt_id":"s)" << i << R"(","rating":1.0})" << "\n";
        }
        rt.close();
        cmd_judge_offline(samples, ratings, out);
        for (const ScoredSampleRecord& r : read_scored_samples(out)) {
            REQUIRE(r.correct.has_value());
            CHECK(*r.correct);
        }
    }

    SUBCASE("mixed ratings set correctness accordingly") {
        std::ofstream rt(ratings);
        rt << R"({"prompt_id":"s0","rating":1.0})" << "\n";
        rt << R"({"prompt_id":"s1","rating":0.0})" << "\n";
        rt << R"({"prompt_id":"s2","rating":1.0})" << "\n";
        rt.close();
        cmd_judge_offline(samples, ratings, out);
        std::vector<ScoredSampleRecord> judged = read_scored_samples(out);
        CHECK(*judged[0].correct);
        CHECK_FALSE(*judged[1].correct);
        CHECK(*judged[2].correct);
    }

    SUBCASE("rating outside {0,1} is an error") {
        std::ofstream rt(ratings);
        rt << R"({"prompt_id":"s0","rating":0.5})" << "\n";
        rt.close();
        CHECK_THROWS_AS(cmd_judge_offline(samples, ratings, out), RecordError);
    }

    SUBCASE("unmatched and duplicate ids are errors") {
        {
            std::ofstream rt(ratings);
            rt << R"({"prompt_id":"s0","rating":1.0})" << "\n";
            rt << R"({"prompt_id":"s1","rating":1.0})" << "\n";
        }
        CHECK_THROWS_WITH_AS(cmd_judge_offline(samples, ratings, out),
                             doctest::Contains("s2"), RecordError);
        {
            std::ofstream rt(ratings);
            for (int i = 0; i < 3; ++i) {
                rt << R"({"prompt_id":"s)" << i << R"(","rating":1.0})" << "\n";
            }
            rt << R"({"prompt_id":"ghost","rating":1.0})" << "\n";
        }
        CHECK_THROWS_WITH_AS(cmd_judge_offline(samples, ratings, out),
                             doctest::Contains("ghost"), RecordError);
        {
            std::ofstream rt(ratings);
            for (int i = 0; i < 3; ++i) {
                rt << R"({"prompt_id":"s)" << i << R"(","rating":1.0})" << "\n";
            }
            rt << R"({"prompt_id":"s0","rating":0.0})" << "\n";
        }
        CHECK_THROWS_WITH_AS(cmd_judge_offline(samples, ratings, out),
                             doctest::Contains("duplicate"), RecordError);
    }
}

TEST_CASE("report command emits the metric and bin CSVs") {
    fs::path dir = fresh_dir("report");
    fs::path samples = dir / "samples.jsonl";
    std::vector<ScoredSampleRecord> records;
    for (int i = 0; i < 40; ++i) {
        ScoredSampleRecord r;
        r.prompt_id = "s" + std::to_string(i);
        r.response = "1";
        r.confidence = (i % 10) / 10.0 + 0.05;
        r.quality = 0.0;
        r.correct = i % 3 == 0;
        records.push_back(r);
    }
    write_scored_samples(records, samples);
    CalibrationReport rep = cmd_report(samples, MetricsConfig{}, dir);
    CHECK(rep.n_samples == 40);
    CHECK(fs::exists(dir / "report.csv"));
    CHECK(fs::exists(dir / "bins.csv"));
    std::string body = slurp(dir / "report.csv");
    CHECK(body.find("metric,value") == 0);
    CHECK(body.find("ece,") != std::string::npos);
    CHECK(body.find("ece_variant,absolute") != std::string::npos);
}

TEST_CASE("train-rm then run produce artifacts; missing checkpoint is a runtime error") {
    fs::path dir = fresh_dir("run");
    ExperimentConfig cfg = tiny_config(dir);

    CHECK_THROWS_AS(cmd_run(cfg, RunMode::conqord), std::runtime_error);

    RmCmdResult rm = cmd_train_rm(cfg);
    CHECK(fs::exists(rm.checkpoint));
    CHECK(fs::exists(dir / "preference_pairs.jsonl"));
    CHECK(fs::exists(dir / "rm_metrics.csv"));
    CHECK(rm.train.holdout_accuracy > 0.5);

    RunRecord record = cmd_run(cfg, RunMode::conqord);
    CHECK(record.seed_results.size() == 2);
    CHECK(record.mode == "conqord");
    CHECK(record.config_snapshot == cfg.raw.entries());
    CHECK(fs::exists(dir / "table.csv"));
    CHECK(fs::exists(dir / "run_record.json"));
    CHECK(fs::exists(dir / "qa_items.jsonl"));
    for (std::uint64_t seed : {1ull, 2ull}) {
        fs::path seed_dir = dir / ("seed_" + std::to_string(seed));
        CHECK(fs::exists(seed_dir / "training_log.csv"));
        CHECK(fs::exists(seed_dir / "report.csv"));
        CHECK(fs::exists(seed_dir / "bins.csv"));
        CHECK(fs::exists(seed_dir / "scored_samples.jsonl"));
        CHECK(fs::exists(seed_dir / "policy.json"));
    }
    std::string log = slurp(dir / "seed_1" / "training_log.csv");
    CHECK(log.find("iteration,mean_quality,mean_alignment,mean_overall,mean_kl,ece,"
                   "accuracy,entropy,clip_fraction") == 0);
}

TEST_CASE("rerun with identical config yields byte-identical csv bodies") {
    fs::path dir_a = fresh_dir("repro_a");
    fs::path dir_b = fresh_dir("repro_b");
    ExperimentConfig cfg_a = tiny_config(dir_a);
    ExperimentConfig cfg_b = tiny_config(dir_b);
    cmd_train_rm(cfg_a);
    cmd_train_rm(cfg_b);
    cmd_run(cfg_a, RunMode::conqord);
    cmd_run(cfg_b, RunMode::conqord);
    CHECK(slurp(dir_a / "table.csv") == slurp(dir_b / "table.csv"));
    CHECK(slurp(dir_a / "seed_1" / "training_log.csv") ==
          slurp(dir_b / "seed_1" / "training_log.csv"));
    CHECK(slurp(dir_a / "rm_metrics.csv") == slurp(dir_b / "rm_metrics.csv"));
}

TEST_CASE("quality_only equals conqord with alpha zero, trajectory for trajectory") {
    fs::path dir = fresh_dir("quality_only");
    ExperimentConfig cfg = tiny_config(dir);
    cmd_train_rm(cfg);
    RunRecord qo = cmd_run(cfg, RunMode::quality_only);

    fs::path dir2 = fresh_dir("alpha_zero");
    ExperimentConfig cfg2 = tiny_config(dir2);
    cfg2.raw.set("reward.alpha", "0.0");
    cfg2.reward.alpha = 0.0;
    cfg2.rm_checkpoint = cfg.rm_checkpoint_path().string();
    cfg2.raw.set("io.rm_checkpoint", cfg2.rm_checkpoint);
    RunRecord az = cmd_run(cfg2, RunMode::conqord);

    REQUIRE(qo.seed_results.size() == az.seed_results.size());
    for (std::size_t i = 0; i < qo.seed_results.size(); ++i) {
        CHECK(qo.seed_results[i].report.ece == az.seed_results[i].report.ece);
        CHECK(qo.seed_results[i].report.accuracy == az.seed_results[i].report.accuracy);
    }
    CHECK(slurp(dir / "seed_1" / "training_log.csv") ==
          slurp(dir2 / "seed_1" / "training_log.csv"));
}

TEST_CASE("sweep-alpha rejects duplicates and stays consistent with cmd_run") {
    fs::path dir = fresh_dir("sweep");
    ExperimentConfig cfg = tiny_config(dir);
    cmd_train_rm(cfg);

    ExperimentConfig dup = cfg;
    dup.alpha_grid = {0.2, 0.2};
    CHECK_THROWS_AS(cmd_sweep_alpha(dup), ConfigError);

    ExperimentConfig single = cfg;
    single.alpha_grid = {0.4};
    std::vector<AlphaRow> rows = cmd_sweep_alpha(single);
    REQUIRE(rows.size() == 1);
    CHECK(fs::exists(dir / "alpha_sweep.csv"));

    // the single sweep row equals a standalone run at that alpha
    fs::path solo_dir = fresh_dir("sweep_solo");
    ExperimentConfig solo = tiny_config(solo_dir);
    solo.rm_checkpoint = cfg.rm_checkpoint_path().string();
    solo.raw.set("io.rm_checkpoint", solo.rm_checkpoint);
    RunRecord record = cmd_run(solo, RunMode::conqord);
    CHECK(rows[0].ece == doctest::Approx(record.aggregate.at("ece").mean).epsilon(1e-12));
    CHECK(rows[0].accuracy ==
          doctest::Approx(record.aggregate.at("accuracy").mean).epsilon(1e-12));
}

TEST_CASE("retrieval command needs a policy checkpoint and writes the sweep csv") {
    fs::path dir = fresh_dir("retrieval_cmd");
    ExperimentConfig cfg = tiny_config(dir);
    CHECK_THROWS_AS(cmd_retrieval(cfg), std::runtime_error);

    cmd_train_rm(cfg);
    cmd_run(cfg, RunMode::conqord);
    std::vector<PipelineRow> rows = cmd_retrieval(cfg);
    CHECK(rows.size() == cfg.retrieval_grid.size());
    CHECK(fs::exists(dir / "retrieval.csv"));
    std::string body = slurp(dir / "retrieval.csv");
    CHECK(body.find("threshold,n_retrieved,n_self,acc_retrieved_bucket,acc_self_bucket,"
                    "acc_overall,acc_always_retrieve,acc_never_retrieve") == 0);
}
