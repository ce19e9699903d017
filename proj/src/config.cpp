#include "conqord/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace conqord {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::defaults() {
    KeyValueConfig c;
    auto& v = c.values_;
    v["env.num_prompts"] = "64";
    v["env.num_answer_tokens"] = "16";
    v["env.confidence_levels"] = "11";
    v["env.t_max"] = "3";
    v["env.ambiguity_min"] = "0.0";
    v["env.ambiguity_max"] = "0.5";
    v["env.seed"] = "0";

    v["reward.alpha"] = "0.4";
    v["reward.beta"] = "0.005";
    v["reward.normalize_alignment"] = "true";

    v["rm.feature_dim"] = "12";
    v["rm.hidden_dim"] = "32";
    v["rm.epochs"] = "30";
    v["rm.batch_size"] = "32";
    v["rm.learning_rate"] = "0.001";
    v["rm.weight_decay"] = "0.1";
    v["rm.holdout_fraction"] = "0.2";
    v["rm.center_coeff"] = "0.2";
    v["rm.seed"] = "0";
    v["rm.num_pairs"] = "8000";

    v["policy.feature_dim"] = "8";
    v["policy.hidden_dim"] = "32";
    v["policy.grammar_mask"] = "true";

    v["ppo.batch_size"] = "32";
    v["ppo.updates_per_minibatch"] = "1";
    v["ppo.clip_epsilon"] = "0.2";
    v["ppo.gae_lambda"] = "0.95";
    v["ppo.gamma"] = "1.0";
    v["ppo.value_coeff"] = "0.5";
    v["ppo.entropy_coeff"] = "0.01";
    v["ppo.learning_rate"] = "0.01";
    v["ppo.weight_decay"] = "0.1";
    v["ppo.total_iterations"] = "300";
    v["ppo.eval_episodes"] = "256";
    v["ppo.final_eval_episodes"] = "1024";
    v["ppo.warm_start_steps"] = "0";
    v["ppo.normalize_advantages"] = "true";

    v["metrics.n_bins"] = "10";
    v["metrics.ece_variant"] = "absolute";

    v["retrieval.threshold"] = "0.7";
    v["retrieval.help_prob"] = "0.8";
    v["retrieval.noise_prob"] = "0.2";
    v["retrieval.episodes"] = "2000";
    v["retrieval.grid"] = "0.0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0";
    v["retrieval.seed"] = "0";

    v["sweep.alpha_grid"] = "0.0,0.2,0.4,0.6,0.8,1.0";

    v["harness.parse_failure"] = "drop";
    v["run.seeds"] = "1,2,3,4,5";
    v["io.rm_checkpoint"] = "rm_checkpoint.json";
    v["io.policy_checkpoint"] = "seed_1/policy.json";
    v["io.output_dir"] = "out";
    return c;
}

KeyValueConfig KeyValueConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    KeyValueConfig c = defaults();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::string text = trim(line);
        if (text.empty()) continue;
        std::size_t eq = text.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": expected key = value");
        }
        c.set(trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
    }
    return c;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second = value;
}

void KeyValueConfig::set_pair(const std::string& key_equals_value) {
    std::size_t eq = key_equals_value.find('=');
    if (eq == std::string::npos) {
        throw ConfigError("--set expects KEY=VALUE, got '" + key_equals_value + "'");
    }
    set(trim(key_equals_value.substr(0, eq)), trim(key_equals_value.substr(eq + 1)));
}

const std::string& KeyValueConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    return it->second;
}

int KeyValueConfig::get_int(const std::string& key) const {
    const std::string& s = get(key);
    try {
        std::size_t used = 0;
        int v = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': '" + s + "' is not an integer");
    }
}

double KeyValueConfig::get_double(const std::string& key) const {
    const std::string& s = get(key);
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': '" + s + "' is not a number");
    }
}

bool KeyValueConfig::get_bool(const std::string& key) const {
    const std::string& s = get(key);
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ConfigError("config key '" + key + "': '" + s + "' is not a boolean");
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key) const {
    const std::string& s = get(key);
    try {
        std::size_t used = 0;
        unsigned long long v = std::stoull(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return static_cast<std::uint64_t>(v);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': '" + s + "' is not an unsigned integer");
    }
}

std::vector<double> KeyValueConfig::get_double_list(const std::string& key) const {
    const std::string& s = get(key);
    std::vector<double> out;
    std::stringstream stream(s);
    std::string item;
    while (std::getline(stream, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': '" + item + "' is not a number");
        }
    }
    if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
    return out;
}

std::vector<std::uint64_t> KeyValueConfig::get_u64_list(const std::string& key) const {
    const std::string& s = get(key);
    std::vector<std::uint64_t> out;
    std::stringstream stream(s);
    std::string item;
    while (std::getline(stream, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            std::size_t used = 0;
            out.push_back(std::stoull(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': '" + item + "' is not an integer");
        }
    }
    if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
    return out;
}

ExperimentConfig ExperimentConfig::from_kv(const KeyValueConfig& kv) {
    ExperimentConfig c;
    c.raw = kv;

    c.env.num_prompts = kv.get_int("env.num_prompts");
    c.env.num_answer_tokens = kv.get_int("env.num_answer_tokens");
    c.env.confidence_levels = kv.get_int("env.confidence_levels");
    c.env.t_max = kv.get_int("env.t_max");
    c.env.ambiguity_min = kv.get_double("env.ambiguity_min");
    c.env.ambiguity_max = kv.get_double("env.ambiguity_max");
    c.env.seed = kv.get_u64("env.seed");

    c.reward.alpha = kv.get_double("reward.alpha");
    c.reward.beta = kv.get_double("reward.beta");
    c.reward.normalize_alignment = kv.get_bool("reward.normalize_alignment");
    if (c.reward.alpha < 0.0) throw ConfigError("reward.alpha must be >= 0");
    if (c.reward.beta < 0.0) throw ConfigError("reward.beta must be >= 0");

    c.rm.feature_dim = kv.get_int("rm.feature_dim");
    c.rm.hidden_dim = kv.get_int("rm.hidden_dim");
    c.rm.epochs = kv.get_int("rm.epochs");
    c.rm.batch_size = kv.get_int("rm.batch_size");
    c.rm.learning_rate = kv.get_double("rm.learning_rate");
    c.rm.weight_decay = kv.get_double("rm.weight_decay");
    c.rm.holdout_fraction = kv.get_double("rm.holdout_fraction");
    c.rm.center_coeff = kv.get_double("rm.center_coeff");
    c.rm.seed = kv.get_u64("rm.seed");
    c.rm_num_pairs = kv.get_int("rm.num_pairs");

    c.policy.feature_dim = kv.get_int("policy.feature_dim");
    c.policy.hidden_dim = kv.get_int("policy.hidden_dim");
    c.policy.grammar_mask = kv.get_bool("policy.grammar_mask");

    c.ppo.batch_size = kv.get_int("ppo.batch_size");
    c.ppo.updates_per_minibatch = kv.get_int("ppo.updates_per_minibatch");
    c.ppo.clip_epsilon = kv.get_double("ppo.clip_epsilon");
    c.ppo.gae_lambda = kv.get_double("ppo.gae_lambda");
    c.ppo.gamma = kv.get_double("ppo.gamma");
    c.ppo.value_coeff = kv.get_double("ppo.value_coeff");
    c.ppo.entropy_coeff = kv.get_double("ppo.entropy_coeff");
    c.ppo.learning_rate = kv.get_double("ppo.learning_rate");
    c.ppo.weight_decay = kv.get_double("ppo.weight_decay");
    c.ppo.total_iterations = kv.get_int("ppo.total_iterations");
    c.ppo.eval_episodes = kv.get_int("ppo.eval_episodes");
    c.ppo.final_eval_episodes = kv.get_int("ppo.final_eval_episodes");
    c.ppo.warm_start_steps = kv.get_int("ppo.warm_start_steps");
    c.ppo.normalize_advantages = kv.get_bool("ppo.normalize_advantages");

    const std::string& pf = kv.get("harness.parse_failure");
    if (pf == "drop") {
        c.ppo.parse_failure = ParseFailurePolicy::drop;
    } else if (pf == "substitute") {
        c.ppo.parse_failure = ParseFailurePolicy::substitute;
    } else {
        throw ConfigError("harness.parse_failure must be 'drop' or 'substitute'");
    }

    c.metrics.n_bins = kv.get_int("metrics.n_bins");
    try {
        c.metrics.variant = ece_variant_from_name(kv.get("metrics.ece_variant"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    c.gate.threshold = kv.get_double("retrieval.threshold");
    c.oracle.help_prob_low = kv.get_double("retrieval.help_prob");
    c.oracle.noise_prob = kv.get_double("retrieval.noise_prob");
    c.oracle.seed = kv.get_u64("retrieval.seed");
    c.retrieval_episodes = kv.get_int("retrieval.episodes");
    c.retrieval_grid = kv.get_double_list("retrieval.grid");
    for (double t : c.retrieval_grid) {
        if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("retrieval.grid entries must be in [0,1]");
    }

    c.alpha_grid = kv.get_double_list("sweep.alpha_grid");
    for (double a : c.alpha_grid) {
        if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("sweep.alpha_grid entries must be in [0,1]");
    }

    c.seeds = kv.get_u64_list("run.seeds");
    if (c.seeds.empty()) throw ConfigError("run.seeds must not be empty");
    c.output_dir = kv.get("io.output_dir");
    c.rm_checkpoint = kv.get("io.rm_checkpoint");
    c.policy_checkpoint = kv.get("io.policy_checkpoint");

    c.env.validate();
    return c;
}

std::filesystem::path ExperimentConfig::rm_checkpoint_path() const {
    std::filesystem::path p(rm_checkpoint);
    return p.is_absolute() ? p : output_dir / p;
}

std::filesystem::path ExperimentConfig::policy_checkpoint_path() const {
    std::filesystem::path p(policy_checkpoint);
    return p.is_absolute() ? p : output_dir / p;
}

}  // namespace conqord
