#include "conqord/reward_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "conqord/optim.hpp"

namespace conqord {

namespace {

// Parameter layout offsets.
struct RmLayout {
    std::size_t e_prompt, e_response, w1, b1, w2, b2, total;
    int in_dim;  // 2 * feature_dim
};

RmLayout layout_of(int prompt_vocab, int response_vocab, int d, int h) {
    RmLayout l{};
    l.in_dim = 2 * d;
    l.e_prompt = 0;
    l.e_response = l.e_prompt + static_cast<std::size_t>(prompt_vocab) * d;
    l.w1 = l.e_response + static_cast<std::size_t>(response_vocab) * d;
    l.b1 = l.w1 + static_cast<std::size_t>(h) * l.in_dim;
    l.w2 = l.b1 + static_cast<std::size_t>(h);
    l.b2 = l.w2 + static_cast<std::size_t>(h);
    l.total = l.b2 + 1;
    return l;
}

void check_tokens(const TokenSeq& seq, int vocab, const char* what) {
    if (seq.empty()) throw std::invalid_argument(std::string(what) + " sequence is empty");
    for (Token t : seq) {
        if (t < 0 || t >= vocab) {
            throw std::invalid_argument(std::string(what) + " token " + std::to_string(t) +
                                        " outside vocabulary of " + std::to_string(vocab));
        }
    }
}

}  // namespace

QualityRewardModel QualityRewardModel::zeros(int prompt_vocab, int response_vocab,
                                             int feature_dim, int hidden_dim) {
    if (prompt_vocab < 1 || response_vocab < 1 || feature_dim < 1 || hidden_dim < 1) {
        throw std::invalid_argument("QualityRewardModel: dimensions must be positive");
    }
    QualityRewardModel m;
    m.prompt_vocab = prompt_vocab;
    m.response_vocab = response_vocab;
    m.feature_dim = feature_dim;
    m.hidden_dim = hidden_dim;
    m.params.assign(layout_of(prompt_vocab, response_vocab, feature_dim, hidden_dim).total, 0.0);
    return m;
}

QualityRewardModel QualityRewardModel::init(int prompt_vocab, int response_vocab,
                                            int feature_dim, int hidden_dim, Rng& rng) {
    QualityRewardModel m = zeros(prompt_vocab, response_vocab, feature_dim, hidden_dim);
    RmLayout l = layout_of(prompt_vocab, response_vocab, feature_dim, hidden_dim);
    for (std::size_t i = 0; i < l.w1; ++i) m.params[i] = 0.1 * rng.normal();
    double w1_scale = 1.0 / std::sqrt(static_cast<double>(l.in_dim));
    for (std::size_t i = l.w1; i < l.b1; ++i) m.params[i] = w1_scale * rng.normal();
    for (std::size_t i = l.w2; i < l.b2; ++i) m.params[i] = 0.1 * rng.normal();
    return m;
}

std::size_t QualityRewardModel::param_count() const { return params.size(); }

double QualityRewardModel::score(const TokenSeq& prompt, const TokenSeq& response) const {
    check_tokens(prompt, prompt_vocab, "prompt");
    check_tokens(response, response_vocab, "response");
    const RmLayout l = layout_of(prompt_vocab, response_vocab, feature_dim, hidden_dim);
    const int d = feature_dim;

    std::vector<double> x(static_cast<std::size_t>(l.in_dim), 0.0);
    for (Token t : prompt) {
        for (int k = 0; k < d; ++k) x[k] += params[l.e_prompt + static_cast<std::size_t>(t) * d + k];
    }
    for (int k = 0; k < d; ++k) x[k] /= static_cast<double>(prompt.size());
    for (Token t : response) {
        for (int k = 0; k < d; ++k)
            x[d + k] += params[l.e_response + static_cast<std::size_t>(t) * d + k];
    }
    for (int k = 0; k < d; ++k) x[d + k] /= static_cast<double>(response.size());

    double out = params[l.b2];
    for (int j = 0; j < hidden_dim; ++j) {
        double z = params[l.b1 + j];
        const std::size_t row = l.w1 + static_cast<std::size_t>(j) * l.in_dim;
        for (int k = 0; k < l.in_dim; ++k) z += params[row + k] * x[k];
        out += params[l.w2 + j] * std::tanh(z);
    }
    return out;
}

void QualityRewardModel::score_backward(const TokenSeq& prompt, const TokenSeq& response,
                                        double dscore, std::vector<double>& grad) const {
    check_tokens(prompt, prompt_vocab, "prompt");
    check_tokens(response, response_vocab, "response");
    if (grad.size() != params.size()) {
        throw std::invalid_argument("score_backward: grad buffer size mismatch");
    }
    const RmLayout l = layout_of(prompt_vocab, response_vocab, feature_dim, hidden_dim);
    const int d = feature_dim;

    std::vector<double> x(static_cast<std::size_t>(l.in_dim), 0.0);
    for (Token t : prompt) {
        for (int k = 0; k < d; ++k) x[k] += params[l.e_prompt + static_cast<std::size_t>(t) * d + k];
    }
    for (int k = 0; k < d; ++k) x[k] /= static_cast<double>(prompt.size());
    for (Token t : response) {
        for (int k = 0; k < d; ++k)
            x[d + k] += params[l.e_response + static_cast<std::size_t>(t) * d + k];
    }
    for (int k = 0; k < d; ++k) x[d + k] /= static_cast<double>(response.size());

    std::vector<double> h(static_cast<std::size_t>(hidden_dim));
    for (int j = 0; j < hidden_dim; ++j) {
        double z = params[l.b1 + j];
        const std::size_t row = l.w1 + static_cast<std::size_t>(j) * l.in_dim;
        for (int k = 0; k < l.in_dim; ++k) z += params[row + k] * x[k];
        h[j] = std::tanh(z);
    }

    grad[l.b2] += dscore;
    std::vector<double> dx(static_cast<std::size_t>(l.in_dim), 0.0);
    for (int j = 0; j < hidden_dim; ++j) {
        grad[l.w2 + j] += dscore * h[j];
        double dz = dscore * params[l.w2 + j] * (1.0 - h[j] * h[j]);
        grad[l.b1 + j] += dz;
        const std::size_t row = l.w1 + static_cast<std::size_t>(j) * l.in_dim;
        for (int k = 0; k < l.in_dim; ++k) {
            grad[row + k] += dz * x[k];
            dx[k] += dz * params[row + k];
        }
    }
    const double p_inv = 1.0 / static_cast<double>(prompt.size());
    for (Token t : prompt) {
        for (int k = 0; k < d; ++k)
            grad[l.e_prompt + static_cast<std::size_t>(t) * d + k] += dx[k] * p_inv;
    }
    const double r_inv = 1.0 / static_cast<double>(response.size());
    for (Token t : response) {
        for (int k = 0; k < d; ++k)
            grad[l.e_response + static_cast<std::size_t>(t) * d + k] += dx[d + k] * r_inv;
    }
}

double quality_score(const QualityRewardModel& model, const TokenSeq& prompt,
                     const TokenSeq& response) {
    return model.score(prompt, response);
}

namespace {

double softplus(double x) {
    // log(1 + exp(x)) without overflow
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

}  // namespace

double ranking_loss(const QualityRewardModel& model, const PreferencePair& pair) {
    double margin = model.score(pair.prompt_tokens, pair.chosen_tokens) -
                    model.score(pair.prompt_tokens, pair.rejected_tokens);
    return softplus(-margin);
}

void ranking_loss_grad(const QualityRewardModel& model, const PreferencePair& pair,
                       std::vector<double>& grad) {
    double margin = model.score(pair.prompt_tokens, pair.chosen_tokens) -
                    model.score(pair.prompt_tokens, pair.rejected_tokens);
    // dL/dmargin = -sigmoid(-margin)
    double dmargin = -1.0 / (1.0 + std::exp(margin));
    model.score_backward(pair.prompt_tokens, pair.chosen_tokens, dmargin, grad);
    model.score_backward(pair.prompt_tokens, pair.rejected_tokens, -dmargin, grad);
}

double ranking_accuracy(const QualityRewardModel& model,
                        std::span<const PreferencePair> pairs) {
    if (pairs.empty()) throw std::invalid_argument("ranking_accuracy: empty pair set");
    std::size_t hits = 0;
    for (const PreferencePair& p : pairs) {
        double ch = model.score(p.prompt_tokens, p.chosen_tokens);
        double rj = model.score(p.prompt_tokens, p.rejected_tokens);
        if (ch > rj) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

RmTrainResult train_quality_rm(std::span<const PreferencePair> pairs,
                               const RmTrainConfig& config, int prompt_vocab,
                               int response_vocab) {
    if (pairs.empty()) throw std::invalid_argument("train_quality_rm: empty dataset");
    if (config.batch_size < 1) throw std::invalid_argument("train_quality_rm: bad batch size");

    Rng rng = Rng::substream(config.seed, 0xD47A5E7);
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1));
        std::swap(order[i - 1], order[j]);
    }

    std::size_t holdout = static_cast<std::size_t>(
        std::llround(config.holdout_fraction * static_cast<double>(pairs.size())));
    if (holdout >= pairs.size()) holdout = pairs.size() - 1;
    std::size_t train_n = pairs.size() - holdout;

    std::vector<PreferencePair> train_set, holdout_set;
    train_set.reserve(train_n);
    holdout_set.reserve(holdout);
    for (std::size_t i = 0; i < train_n; ++i) train_set.push_back(pairs[order[i]]);
    for (std::size_t i = train_n; i < pairs.size(); ++i) holdout_set.push_back(pairs[order[i]]);

    RmTrainResult result;
    result.model = QualityRewardModel::init(prompt_vocab, response_vocab, config.feature_dim,
                                            config.hidden_dim, rng);
    result.holdout_count = holdout_set.size();

    AdamW opt(result.model.param_count(), config.learning_rate, config.weight_decay);
    std::vector<double> grad(result.model.param_count(), 0.0);
    std::vector<std::size_t> idx(train_set.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = idx.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1));
            std::swap(idx[i - 1], idx[j]);
        }
        double epoch_loss = 0.0;
        std::size_t pos = 0;
        while (pos < idx.size()) {
            std::size_t end = std::min(pos + static_cast<std::size_t>(config.batch_size),
                                       idx.size());
            std::fill(grad.begin(), grad.end(), 0.0);
            double batch_loss = 0.0;
            for (std::size_t i = pos; i < end; ++i) {
                const PreferencePair& pair = train_set[idx[i]];
                batch_loss += ranking_loss(result.model, pair);
                ranking_loss_grad(result.model, pair, grad);
                if (config.center_coeff > 0.0) {
                    double sc = result.model.score(pair.prompt_tokens, pair.chosen_tokens);
                    double sr = result.model.score(pair.prompt_tokens, pair.rejected_tokens);
                    double level = sc + sr;
                    batch_loss += 0.5 * config.center_coeff * level * level;
                    result.model.score_backward(pair.prompt_tokens, pair.chosen_tokens,
                                                config.center_coeff * level, grad);
                    result.model.score_backward(pair.prompt_tokens, pair.rejected_tokens,
                                                config.center_coeff * level, grad);
                }
            }
            double inv = 1.0 / static_cast<double>(end - pos);
            for (double& g : grad) g *= inv;
            opt.step(result.model.params, grad);
            epoch_loss += batch_loss;
            pos = end;
        }
        result.epoch_losses.push_back(epoch_loss / static_cast<double>(train_set.size()));
        result.epoch_holdout_accuracy.push_back(
            holdout_set.empty() ? ranking_accuracy(result.model, train_set)
                                : ranking_accuracy(result.model, holdout_set));
    }

    result.holdout_accuracy = result.epoch_holdout_accuracy.back();
    return result;
}

void save_reward_model(const QualityRewardModel& model, const std::filesystem::path& path) {
    nlohmann::json j{{"kind", "quality_rm"},
                     {"prompt_vocab", model.prompt_vocab},
                     {"response_vocab", model.response_vocab},
                     {"feature_dim", model.feature_dim},
                     {"hidden_dim", model.hidden_dim},
                     {"parameters", model.params}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << j.dump() << '\n';
}

QualityRewardModel load_reward_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    nlohmann::json j = nlohmann::json::parse(in);
    if (j.value("kind", "") != "quality_rm") {
        throw std::runtime_error(path.string() + ": not a reward-model checkpoint");
    }
    QualityRewardModel m = QualityRewardModel::zeros(
        j.at("prompt_vocab").get<int>(), j.at("response_vocab").get<int>(),
        j.at("feature_dim").get<int>(), j.at("hidden_dim").get<int>());
    std::vector<double> loaded = j.at("parameters").get<std::vector<double>>();
    if (loaded.size() != m.params.size()) {
        throw std::runtime_error(path.string() + ": parameter count mismatch");
    }
    m.params = std::move(loaded);
    return m;
}

}  // namespace conqord
