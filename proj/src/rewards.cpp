#include "conqord/rewards.hpp"

#include <stdexcept>

namespace conqord {

std::vector<double> alignment_reward(std::span<const double> confidences,
                                     std::span<const double> qualities, bool normalize) {
    if (confidences.size() != qualities.size()) {
        throw std::invalid_argument("alignment_reward: length mismatch");
    }
    if (confidences.empty()) {
        throw std::invalid_argument("alignment_reward: empty batch");
    }
    const std::size_t n = confidences.size();
    std::vector<double> out(n, 0.0);
    if (n == 1) return out;

    double sum_c = 0.0, sum_q = 0.0, sum_cq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum_c += confidences[i];
        sum_q += qualities[i];
        sum_cq += confidences[i] * qualities[i];
    }
    const double dn = static_cast<double>(n);
    const double scale = normalize ? 1.0 / (dn - 1.0) : 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        double c = confidences[i];
        double q = qualities[i];
        out[i] = (dn * c * q - c * sum_q - q * sum_c + sum_cq) * scale;
    }
    return out;
}

std::vector<double> overall_reward(const RewardConfig& config,
                                   std::span<const double> quality,
                                   std::span<const double> alignment) {
    if (quality.size() != alignment.size()) {
        throw std::invalid_argument("overall_reward: length mismatch");
    }
    std::vector<double> out(quality.size());
    for (std::size_t i = 0; i < quality.size(); ++i) {
        out[i] = quality[i] + config.alpha * alignment[i];
    }
    return out;
}

double final_reward(const RewardConfig& config, double overall,
                    std::span<const double> logprob_policy,
                    std::span<const double> logprob_reference) {
    if (logprob_policy.size() != logprob_reference.size()) {
        throw std::invalid_argument("final_reward: length mismatch");
    }
    double kl = 0.0;
    for (std::size_t t = 0; t < logprob_policy.size(); ++t) {
        kl += logprob_policy[t] - logprob_reference[t];
    }
    return overall - config.beta * kl;
}

BatchRewards compute_batch_rewards(const RewardConfig& config,
                                   std::span<const double> confidences,
                                   std::span<const double> qualities) {
    BatchRewards rewards;
    rewards.quality.assign(qualities.begin(), qualities.end());
    rewards.alignment = alignment_reward(confidences, qualities, config.normalize_alignment);
    rewards.overall = overall_reward(config, rewards.quality, rewards.alignment);
    return rewards;
}

}  // namespace conqord
