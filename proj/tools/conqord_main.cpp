// conqord: desk-scale lab for confidence-quality order-preserving alignment.
//
// Subcommands: train-rm, run, sweep-alpha, retrieval, judge-offline, report.
// Exit codes: 0 success, 1 usage/config error, 2 runtime error.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "conqord/config.hpp"
#include "conqord/experiment.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    std::string seeds;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "Config file (key = value lines)");
    cmd->add_option("--set", flags.overrides, "Override a config key (KEY=VALUE, repeatable)");
    cmd->add_option("--out", flags.out_dir, "Output directory");
    cmd->add_option("--seeds", flags.seeds, "Comma-separated seed list");
}

conqord::ExperimentConfig build_config(const CommonFlags& flags) {
    conqord::KeyValueConfig kv = flags.config_path.empty()
                                     ? conqord::KeyValueConfig::defaults()
                                     : conqord::KeyValueConfig::from_file(flags.config_path);
    for (const std::string& kvp : flags.overrides) kv.set_pair(kvp);
    if (!flags.out_dir.empty()) kv.set("io.output_dir", flags.out_dir);
    if (!flags.seeds.empty()) kv.set("run.seeds", flags.seeds);
    return conqord::ExperimentConfig::from_kv(kv);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Confidence-quality order-preserving alignment lab"};
    app.require_subcommand(1);

    CommonFlags train_rm_flags;
    CLI::App* train_rm = app.add_subcommand("train-rm", "Train the quality reward model");
    add_common(train_rm, train_rm_flags);

    CommonFlags run_flags;
    std::string mode = "conqord";
    CLI::App* run = app.add_subcommand("run", "Train and evaluate a policy per seed");
    add_common(run, run_flags);
    run->add_option("--mode", mode, "conqord | preapproach | quality_only");

    CommonFlags sweep_flags;
    CLI::App* sweep = app.add_subcommand("sweep-alpha", "Run the alpha grid with shared seeds");
    add_common(sweep, sweep_flags);

    CommonFlags retrieval_flags;
    CLI::App* retrieval = app.add_subcommand("retrieval", "Confidence-gated retrieval sweep");
    add_common(retrieval, retrieval_flags);

    std::string samples_file, ratings_file, judged_out;
    CLI::App* judge = app.add_subcommand("judge-offline", "Join external ratings onto samples");
    judge->add_option("--samples", samples_file, "scored_samples JSONL")->required();
    judge->add_option("--ratings", ratings_file, "ratings JSONL ({prompt_id, rating})")
        ->required();
    judge->add_option("--output", judged_out, "judged scored_samples JSONL")->required();

    CommonFlags report_flags;
    std::string report_samples;
    CLI::App* report_cmd = app.add_subcommand("report", "Calibration report for a samples file");
    add_common(report_cmd, report_flags);
    report_cmd->add_option("--samples", report_samples, "scored_samples JSONL")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*train_rm) {
            conqord::cmd_train_rm(build_config(train_rm_flags));
        } else if (*run) {
            conqord::RunMode run_mode = conqord::parse_run_mode(mode);
            conqord::cmd_run(build_config(run_flags), run_mode);
        } else if (*sweep) {
            conqord::cmd_sweep_alpha(build_config(sweep_flags));
        } else if (*retrieval) {
            conqord::cmd_retrieval(build_config(retrieval_flags));
        } else if (*judge) {
            conqord::cmd_judge_offline(samples_file, ratings_file, judged_out);
        } else if (*report_cmd) {
            conqord::ExperimentConfig cfg = build_config(report_flags);
            conqord::CalibrationReport rep =
                conqord::cmd_report(report_samples, cfg.metrics, cfg.output_dir);
            std::cout << "ece " << rep.ece << ", accuracy " << rep.accuracy << " over "
                      << rep.n_samples << " samples\n";
        }
    } catch (const conqord::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
