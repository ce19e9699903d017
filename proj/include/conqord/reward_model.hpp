#pragma once
// Quality reward model R_Q: per-segment mean-pooled token embeddings for
// prompt and response, concatenated into a 2-layer tanh perceptron with a
// scalar head. Trained with the binary ranking loss
//   L = -log(sigmoid(R_Q(x, y_h) - R_Q(x, y_l)))
// under AdamW.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "conqord/rng.hpp"
#include "conqord/types.hpp"

namespace conqord {

struct QualityRewardModel {
    int prompt_vocab = 0;
    int response_vocab = 0;
    int feature_dim = 0;  // embedding width per segment
    int hidden_dim = 0;
    std::vector<double> params;  // [E_prompt | E_response | W1 | b1 | w2 | b2]

    static QualityRewardModel init(int prompt_vocab, int response_vocab, int feature_dim,
                                   int hidden_dim, Rng& rng);
    static QualityRewardModel zeros(int prompt_vocab, int response_vocab, int feature_dim,
                                    int hidden_dim);

    std::size_t param_count() const;
    double score(const TokenSeq& prompt, const TokenSeq& response) const;
    // Accumulates d(dscore * score)/dparams into grad.
    void score_backward(const TokenSeq& prompt, const TokenSeq& response, double dscore,
                        std::vector<double>& grad) const;
};

double quality_score(const QualityRewardModel& model, const TokenSeq& prompt,
                     const TokenSeq& response);

// Numerically stable softplus form log(1 + exp(-margin)).
double ranking_loss(const QualityRewardModel& model, const PreferencePair& pair);

// Accumulates the ranking-loss gradient into grad.
void ranking_loss_grad(const QualityRewardModel& model, const PreferencePair& pair,
                       std::vector<double>& grad);

struct RmTrainConfig {
    int feature_dim = 12;
    int hidden_dim = 32;
    int epochs = 30;
    int batch_size = 32;
    double learning_rate = 1e-3;
    double weight_decay = 0.1;
    double holdout_fraction = 0.2;
    // Anchors (score_chosen + score_rejected) toward 0 during training. The
    // ranking loss is invariant to per-prompt score offsets, so without an
    // anchor the absolute levels that the alignment reward compares across
    // samples are left to initialization noise.
    double center_coeff = 0.2;
    std::uint64_t seed = 0;
};

struct RmTrainResult {
    QualityRewardModel model;
    double holdout_accuracy = 0.0;     // fraction of held-out pairs ranked correctly
    std::vector<double> epoch_losses;  // mean training loss per epoch
    std::vector<double> epoch_holdout_accuracy;
    std::size_t holdout_count = 0;     // 0 means accuracy was measured on train
};

// Shuffles, holds out the tail fraction, and runs minibatch AdamW on the
// ranking loss. Throws on an empty dataset.
RmTrainResult train_quality_rm(std::span<const PreferencePair> pairs,
                               const RmTrainConfig& config, int prompt_vocab,
                               int response_vocab);

// Pairwise ranking accuracy of a scorer on a pair set.
double ranking_accuracy(const QualityRewardModel& model, std::span<const PreferencePair> pairs);

// Checkpoint I/O; JSON with shortest-round-trip doubles, so reload is
// bit-exact on scores.
void save_reward_model(const QualityRewardModel& model, const std::filesystem::path& path);
QualityRewardModel load_reward_model(const std::filesystem::path& path);

}  // namespace conqord
