#include "conqord/retrieval.hpp"

#include <stdexcept>

#include "conqord/csv.hpp"

namespace conqord {

GateDecision gate(double confidence, const GateConfig& config) {
    if (!(confidence >= 0.0 && confidence <= 1.0)) {
        throw std::out_of_range("gate: confidence outside [0,1]");
    }
    if (!(config.threshold >= 0.0 && config.threshold <= 1.0)) {
        throw std::out_of_range("gate: threshold outside [0,1]");
    }
    return confidence < config.threshold ? GateDecision::retrieve : GateDecision::self_answer;
}

bool apply_oracle_u(bool correct_before, const RetrievalOracle& oracle, double u_help,
                    double u_noise) {
    if (correct_before) return u_noise >= oracle.noise_prob;
    return u_help < oracle.help_prob_low;
}

bool apply_oracle(bool correct_before, const RetrievalOracle& oracle, Rng& rng) {
    double u_help = rng.uniform();
    double u_noise = rng.uniform();
    return apply_oracle_u(correct_before, oracle, u_help, u_noise);
}

std::vector<PipelineEpisode> roll_pipeline_episodes(const PolicyModel& policy,
                                                    const Environment& env, int n,
                                                    std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("roll_pipeline_episodes: need n >= 1");
    Rng env_rng = Rng::substream(seed, 0x9E7CAFEull);
    Rng oracle_rng = Rng::substream(seed, 0x07AC1Eull);
    std::vector<PipelineEpisode> episodes;
    episodes.reserve(static_cast<std::size_t>(n));
    for (int e = 0; e < n; ++e) {
        auto [state, gold] = env.reset(env_rng);
        Episode ep;
        ep.prompt_id = state.prompt_id;
        bool done = false;
        while (!done) {
            ActionDist dist = policy.action_dist(state);
            Token action = policy.sample(dist, env_rng);
            ep.actions.push_back(action);
            auto [next, is_done] = env.step(state, action);
            state = std::move(next);
            done = is_done;
        }
        ep.parsed = env.parse_episode(ep.actions);
        PipelineEpisode pe;
        pe.confidence = ep.parsed.ok() ? ep.parsed.confidence : 0.0;
        pe.correct = env.judge(ep, gold);
        pe.u_help = oracle_rng.uniform();
        pe.u_noise = oracle_rng.uniform();
        episodes.push_back(pe);
    }
    return episodes;
}

PipelineRow evaluate_pipeline(std::span<const PipelineEpisode> episodes,
                              const GateConfig& config, const RetrievalOracle& oracle) {
    if (episodes.empty()) throw std::invalid_argument("evaluate_pipeline: no episodes");
    PipelineRow row;
    row.threshold = config.threshold;
    double self_hits = 0.0, ret_hits = 0.0, ret_pre_hits = 0.0;
    double always_hits = 0.0, never_hits = 0.0;
    for (const PipelineEpisode& e : episodes) {
        bool retrieved_outcome = apply_oracle_u(e.correct, oracle, e.u_help, e.u_noise);
        never_hits += e.correct ? 1.0 : 0.0;
        always_hits += retrieved_outcome ? 1.0 : 0.0;
        if (gate(e.confidence, config) == GateDecision::retrieve) {
            ++row.n_retrieved;
            ret_pre_hits += e.correct ? 1.0 : 0.0;
            ret_hits += retrieved_outcome ? 1.0 : 0.0;
        } else {
            ++row.n_self;
            self_hits += e.correct ? 1.0 : 0.0;
        }
    }
    const double n = static_cast<double>(episodes.size());
    row.acc_retrieved_bucket = row.n_retrieved > 0 ? ret_hits / row.n_retrieved : 0.0;
    row.acc_retrieved_bucket_pre = row.n_retrieved > 0 ? ret_pre_hits / row.n_retrieved : 0.0;
    row.acc_self_bucket = row.n_self > 0 ? self_hits / row.n_self : 0.0;
    row.acc_overall = (ret_hits + self_hits) / n;
    row.acc_always_retrieve = always_hits / n;
    row.acc_never_retrieve = never_hits / n;
    return row;
}

PipelineRow evaluate_pipeline(const PolicyModel& policy, const Environment& env,
                              const GateConfig& config, const RetrievalOracle& oracle,
                              int n_episodes) {
    std::vector<PipelineEpisode> episodes =
        roll_pipeline_episodes(policy, env, n_episodes, oracle.seed);
    return evaluate_pipeline(episodes, config, oracle);
}

std::vector<PipelineRow> sweep_thresholds(std::span<const PipelineEpisode> episodes,
                                          std::span<const double> grid,
                                          const RetrievalOracle& oracle) {
    if (grid.empty()) throw std::invalid_argument("sweep_thresholds: empty grid");
    std::vector<PipelineRow> rows;
    rows.reserve(grid.size());
    for (double threshold : grid) {
        rows.push_back(evaluate_pipeline(episodes, GateConfig{threshold}, oracle));
    }
    return rows;
}

std::vector<PipelineRow> sweep_thresholds(const PolicyModel& policy, const Environment& env,
                                          const RetrievalOracle& oracle,
                                          std::span<const double> grid, int n_episodes) {
    std::vector<PipelineEpisode> episodes =
        roll_pipeline_episodes(policy, env, n_episodes, oracle.seed);
    return sweep_thresholds(episodes, grid, oracle);
}

void write_retrieval_csv(const std::vector<PipelineRow>& rows,
                         const std::filesystem::path& path) {
    CsvWriter csv(path, {"threshold", "n_retrieved", "n_self", "acc_retrieved_bucket",
                         "acc_self_bucket", "acc_overall", "acc_always_retrieve",
                         "acc_never_retrieve"});
    for (const PipelineRow& r : rows) {
        csv.row({fmt_double(r.threshold), std::to_string(r.n_retrieved),
                 std::to_string(r.n_self), fmt_double(r.acc_retrieved_bucket),
                 fmt_double(r.acc_self_bucket), fmt_double(r.acc_overall),
                 fmt_double(r.acc_always_retrieve), fmt_double(r.acc_never_retrieve)});
    }
    csv.close();
}

}  // namespace conqord
