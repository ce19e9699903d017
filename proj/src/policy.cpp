#include "conqord/policy.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace conqord {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct NetLayout {
    std::size_t e_prompt, e_token, w1, b1, w2, b2, total;
    int in_dim;  // feature_dim + t_max + feature_dim
};

NetLayout layout_of(int num_prompts, int vocab, int t_max, int d, int h, int out_dim) {
    NetLayout l{};
    l.in_dim = 2 * d + t_max;
    l.e_prompt = 0;
    l.e_token = l.e_prompt + static_cast<std::size_t>(num_prompts) * d;
    l.w1 = l.e_token + static_cast<std::size_t>(vocab) * d;
    l.b1 = l.w1 + static_cast<std::size_t>(h) * l.in_dim;
    l.w2 = l.b1 + static_cast<std::size_t>(h);
    l.b2 = l.w2 + static_cast<std::size_t>(out_dim) * h;
    l.total = l.b2 + static_cast<std::size_t>(out_dim);
    return l;
}

void init_params(std::vector<double>& params, const NetLayout& l, Rng& rng) {
    for (std::size_t i = 0; i < l.w1; ++i) params[i] = 0.1 * rng.normal();
    double w1_scale = 1.0 / std::sqrt(static_cast<double>(l.in_dim));
    for (std::size_t i = l.w1; i < l.b1; ++i) params[i] = w1_scale * rng.normal();
    for (std::size_t i = l.w2; i < l.b2; ++i) params[i] = 0.01 * rng.normal();
}

// features = [prompt embedding | step one-hot | mean emitted-token embedding]
std::vector<double> features(const std::vector<double>& params, const NetLayout& l, int d,
                             int t_max, const EpisodeState& state) {
    if (state.step < 0 || state.step >= t_max) {
        throw std::out_of_range("policy features: step outside [0, t_max)");
    }
    std::vector<double> x(static_cast<std::size_t>(l.in_dim), 0.0);
    const std::size_t prow = l.e_prompt + static_cast<std::size_t>(state.prompt_id) * d;
    for (int k = 0; k < d; ++k) x[k] = params[prow + k];
    x[d + state.step] = 1.0;
    if (!state.emitted.empty()) {
        double inv = 1.0 / static_cast<double>(state.emitted.size());
        for (Token t : state.emitted) {
            const std::size_t trow = l.e_token + static_cast<std::size_t>(t) * d;
            for (int k = 0; k < d; ++k) x[d + t_max + k] += params[trow + k] * inv;
        }
    }
    return x;
}

void features_backward(const std::vector<double>& dx, const NetLayout& l, int d, int t_max,
                       const EpisodeState& state, std::vector<double>& grad) {
    const std::size_t prow = l.e_prompt + static_cast<std::size_t>(state.prompt_id) * d;
    for (int k = 0; k < d; ++k) grad[prow + k] += dx[k];
    if (!state.emitted.empty()) {
        double inv = 1.0 / static_cast<double>(state.emitted.size());
        for (Token t : state.emitted) {
            const std::size_t trow = l.e_token + static_cast<std::size_t>(t) * d;
            for (int k = 0; k < d; ++k) grad[trow + k] += dx[d + t_max + k] * inv;
        }
    }
}

std::vector<double> hidden_forward(const std::vector<double>& params, const NetLayout& l,
                                   int h, const std::vector<double>& x) {
    std::vector<double> out(static_cast<std::size_t>(h));
    for (int j = 0; j < h; ++j) {
        double z = params[l.b1 + j];
        const std::size_t row = l.w1 + static_cast<std::size_t>(j) * l.in_dim;
        for (int k = 0; k < l.in_dim; ++k) z += params[row + k] * x[k];
        out[j] = std::tanh(z);
    }
    return out;
}

}  // namespace

PolicyModel PolicyModel::init(const EnvConfig& env, const PolicyConfig& config, Rng& rng) {
    env.validate();
    PolicyModel m;
    m.num_prompts = env.num_prompts;
    m.num_answer_tokens = env.num_answer_tokens;
    m.confidence_levels = env.confidence_levels;
    m.t_max = env.t_max;
    m.feature_dim = config.feature_dim;
    m.hidden_dim = config.hidden_dim;
    m.grammar_mask = config.grammar_mask;
    NetLayout l = layout_of(m.num_prompts, m.vocab(), m.t_max, m.feature_dim, m.hidden_dim,
                            m.vocab());
    m.params.assign(l.total, 0.0);
    init_params(m.params, l, rng);
    return m;
}

std::size_t PolicyModel::param_count() const { return params.size(); }

std::vector<bool> PolicyModel::legal_actions(int step) const {
    std::vector<bool> legal(static_cast<std::size_t>(vocab()), !grammar_mask);
    if (!grammar_mask) return legal;
    if (step == 0) {
        for (Token t = 0; t < num_answer_tokens; ++t) legal[t] = true;
    } else if (step == 1) {
        for (int lv = 0; lv < confidence_levels; ++lv) legal[num_answer_tokens + lv] = true;
    } else {
        legal[eos_token()] = true;
    }
    return legal;
}

ActionDist PolicyModel::action_dist(const EpisodeState& state) const {
    const int v = vocab();
    NetLayout l = layout_of(num_prompts, v, t_max, feature_dim, hidden_dim, v);
    std::vector<double> x = features(params, l, feature_dim, t_max, state);
    std::vector<double> h = hidden_forward(params, l, hidden_dim, x);

    std::vector<bool> legal = legal_actions(state.step);
    ActionDist dist;
    dist.logp.assign(static_cast<std::size_t>(v), kNegInf);
    dist.probs.assign(static_cast<std::size_t>(v), 0.0);

    std::vector<double> logits(static_cast<std::size_t>(v), kNegInf);
    double max_logit = kNegInf;
    for (Token a = 0; a < v; ++a) {
        if (!legal[a]) continue;
        double z = params[l.b2 + a];
        const std::size_t row = l.w2 + static_cast<std::size_t>(a) * hidden_dim;
        for (int j = 0; j < hidden_dim; ++j) z += params[row + j] * h[j];
        logits[a] = z;
        if (z > max_logit) max_logit = z;
    }
    if (max_logit == kNegInf) throw std::logic_error("action_dist: no legal action");

    double sum = 0.0;
    for (Token a = 0; a < v; ++a) {
        if (legal[a]) sum += std::exp(logits[a] - max_logit);
    }
    double log_z = max_logit + std::log(sum);
    for (Token a = 0; a < v; ++a) {
        if (!legal[a]) continue;
        dist.logp[a] = logits[a] - log_z;
        dist.probs[a] = std::exp(dist.logp[a]);
        if (dist.probs[a] > 0.0) dist.entropy -= dist.probs[a] * dist.logp[a];
    }
    return dist;
}

Token PolicyModel::sample(const ActionDist& dist, Rng& rng) const {
    double u = rng.uniform();
    double acc = 0.0;
    Token last_legal = -1;
    for (Token a = 0; a < vocab(); ++a) {
        if (dist.probs[a] <= 0.0) continue;
        last_legal = a;
        acc += dist.probs[a];
        if (u < acc) return a;
    }
    if (last_legal < 0) throw std::logic_error("sample: degenerate distribution");
    return last_legal;  // guard against rounding at acc ~ 1
}

void PolicyModel::backward(const EpisodeState& state, Token action, double d_logp_a,
                           double d_entropy, std::vector<double>& grad) const {
    if (grad.size() != params.size()) {
        throw std::invalid_argument("policy backward: grad buffer size mismatch");
    }
    const int v = vocab();
    NetLayout l = layout_of(num_prompts, v, t_max, feature_dim, hidden_dim, v);
    std::vector<double> x = features(params, l, feature_dim, t_max, state);
    std::vector<double> h = hidden_forward(params, l, hidden_dim, x);
    ActionDist dist = action_dist(state);
    if (dist.probs[action] <= 0.0) {
        throw std::invalid_argument("policy backward: action has zero probability");
    }

    // dL/dlogit_a = d_logp_a*(1{a=action} - p_a) - d_entropy*p_a*(logp_a + H)
    std::vector<double> dz(static_cast<std::size_t>(v), 0.0);
    for (Token a = 0; a < v; ++a) {
        if (dist.probs[a] <= 0.0) continue;
        double g = d_logp_a * ((a == action ? 1.0 : 0.0) - dist.probs[a]);
        g += d_entropy * (-dist.probs[a] * (dist.logp[a] + dist.entropy));
        dz[a] = g;
    }

    std::vector<double> dh(static_cast<std::size_t>(hidden_dim), 0.0);
    for (Token a = 0; a < v; ++a) {
        if (dz[a] == 0.0) continue;
        grad[l.b2 + a] += dz[a];
        const std::size_t row = l.w2 + static_cast<std::size_t>(a) * hidden_dim;
        for (int j = 0; j < hidden_dim; ++j) {
            grad[row + j] += dz[a] * h[j];
            dh[j] += dz[a] * params[row + j];
        }
    }

    std::vector<double> dx(static_cast<std::size_t>(l.in_dim), 0.0);
    for (int j = 0; j < hidden_dim; ++j) {
        double dz1 = dh[j] * (1.0 - h[j] * h[j]);
        grad[l.b1 + j] += dz1;
        const std::size_t row = l.w1 + static_cast<std::size_t>(j) * l.in_dim;
        for (int k = 0; k < l.in_dim; ++k) {
            grad[row + k] += dz1 * x[k];
            dx[k] += dz1 * params[row + k];
        }
    }
    features_backward(dx, l, feature_dim, t_max, state, grad);
}

ValueModel ValueModel::init(const EnvConfig& env, const PolicyConfig& config, Rng& rng) {
    env.validate();
    ValueModel m;
    m.num_prompts = env.num_prompts;
    m.vocab = env.vocab_size();
    m.t_max = env.t_max;
    m.feature_dim = config.feature_dim;
    m.hidden_dim = config.hidden_dim;
    NetLayout l = layout_of(m.num_prompts, m.vocab, m.t_max, m.feature_dim, m.hidden_dim, 1);
    m.params.assign(l.total, 0.0);
    init_params(m.params, l, rng);
    return m;
}

std::size_t ValueModel::param_count() const { return params.size(); }

double ValueModel::value(const EpisodeState& state) const {
    NetLayout l = layout_of(num_prompts, vocab, t_max, feature_dim, hidden_dim, 1);
    std::vector<double> x = features(params, l, feature_dim, t_max, state);
    std::vector<double> h = hidden_forward(params, l, hidden_dim, x);
    double out = params[l.b2];
    for (int j = 0; j < hidden_dim; ++j) out += params[l.w2 + j] * h[j];
    return out;
}

void ValueModel::backward(const EpisodeState& state, double dvalue,
                          std::vector<double>& grad) const {
    if (grad.size() != params.size()) {
        throw std::invalid_argument("value backward: grad buffer size mismatch");
    }
    NetLayout l = layout_of(num_prompts, vocab, t_max, feature_dim, hidden_dim, 1);
    std::vector<double> x = features(params, l, feature_dim, t_max, state);
    std::vector<double> h = hidden_forward(params, l, hidden_dim, x);

    grad[l.b2] += dvalue;
    std::vector<double> dx(static_cast<std::size_t>(l.in_dim), 0.0);
    for (int j = 0; j < hidden_dim; ++j) {
        grad[l.w2 + j] += dvalue * h[j];
        double dz1 = dvalue * params[l.w2 + j] * (1.0 - h[j] * h[j]);
        grad[l.b1 + j] += dz1;
        const std::size_t row = l.w1 + static_cast<std::size_t>(j) * l.in_dim;
        for (int k = 0; k < l.in_dim; ++k) {
            grad[row + k] += dz1 * x[k];
            dx[k] += dz1 * params[row + k];
        }
    }
    features_backward(dx, l, feature_dim, t_max, state, grad);
}

void save_policy(const PolicyModel& model, const std::filesystem::path& path) {
    nlohmann::json j{{"kind", "policy"},
                     {"num_prompts", model.num_prompts},
                     {"num_answer_tokens", model.num_answer_tokens},
                     {"confidence_levels", model.confidence_levels},
                     {"t_max", model.t_max},
                     {"feature_dim", model.feature_dim},
                     {"hidden_dim", model.hidden_dim},
                     {"grammar_mask", model.grammar_mask},
                     {"parameters", model.params}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << j.dump() << '\n';
}

PolicyModel load_policy(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    nlohmann::json j = nlohmann::json::parse(in);
    if (j.value("kind", "") != "policy") {
        throw std::runtime_error(path.string() + ": not a policy checkpoint");
    }
    PolicyModel m;
    m.num_prompts = j.at("num_prompts").get<int>();
    m.num_answer_tokens = j.at("num_answer_tokens").get<int>();
    m.confidence_levels = j.at("confidence_levels").get<int>();
    m.t_max = j.at("t_max").get<int>();
    m.feature_dim = j.at("feature_dim").get<int>();
    m.hidden_dim = j.at("hidden_dim").get<int>();
    m.grammar_mask = j.at("grammar_mask").get<bool>();
    m.params = j.at("parameters").get<std::vector<double>>();
    NetLayout l = layout_of(m.num_prompts, m.vocab(), m.t_max, m.feature_dim, m.hidden_dim,
                            m.vocab());
    if (m.params.size() != l.total) {
        throw std::runtime_error(path.string() + ": parameter count mismatch");
    }
    return m;
}

}  // namespace conqord
