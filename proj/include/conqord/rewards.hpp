#pragma once
// Reward composition: the order-preserving alignment reward over a batch,
// the quality+alignment blend, and the KL-penalized final reward.

#include <span>
#include <vector>

namespace conqord {

struct RewardConfig {
    double alpha = 0.4;                // alignment weight
    double beta = 0.005;               // KL penalty coefficient
    bool normalize_alignment = false;  // divide the pairwise sum by (n-1)
};

struct BatchRewards {
    std::vector<double> quality;
    std::vector<double> alignment;
    std::vector<double> overall;
};

// out[i] = sum_{j != i} (c_i - c_j)(q_i - q_j), computed in O(n) via
//   n*c_i*q_i - c_i*sum(q) - q_i*sum(c) + sum(c.q);
// optionally divided by (n-1). n = 1 yields the empty sum, 0.
std::vector<double> alignment_reward(std::span<const double> confidences,
                                     std::span<const double> qualities,
                                     bool normalize = false);

// Elementwise quality + alpha * alignment.
std::vector<double> overall_reward(const RewardConfig& config,
                                   std::span<const double> quality,
                                   std::span<const double> alignment);

// overall - beta * sum_t (logprob_policy[t] - logprob_reference[t]); the sum
// is the sampled-trajectory estimator of the divergence from the reference.
double final_reward(const RewardConfig& config, double overall,
                    std::span<const double> logprob_policy,
                    std::span<const double> logprob_reference);

// Bundles quality, alignment and overall for one batch.
BatchRewards compute_batch_rewards(const RewardConfig& config,
                                   std::span<const double> confidences,
                                   std::span<const double> qualities);

}  // namespace conqord
