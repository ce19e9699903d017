#pragma once
// Flat key-value experiment configuration with dotted section names
// (env.num_prompts = 64). Every key has a default; unknown keys are
// configuration errors, which keeps files diffable and typo-safe.

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "conqord/env.hpp"
#include "conqord/metrics.hpp"
#include "conqord/policy.hpp"
#include "conqord/ppo.hpp"
#include "conqord/retrieval.hpp"
#include "conqord/reward_model.hpp"
#include "conqord/rewards.hpp"

namespace conqord {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class KeyValueConfig {
public:
    // All known keys with their default values.
    static KeyValueConfig defaults();
    // Defaults overlaid with a config file; '#' starts a comment.
    static KeyValueConfig from_file(const std::filesystem::path& path);

    // KEY=VALUE override (--set); the key must be known.
    void set(const std::string& key, const std::string& value);
    void set_pair(const std::string& key_equals_value);

    const std::string& get(const std::string& key) const;
    int get_int(const std::string& key) const;
    double get_double(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;
    std::vector<double> get_double_list(const std::string& key) const;
    std::vector<std::uint64_t> get_u64_list(const std::string& key) const;

    const std::map<std::string, std::string>& entries() const { return values_; }

    bool operator==(const KeyValueConfig& other) const = default;

private:
    std::map<std::string, std::string> values_;
};

// Typed view assembled from the key-value map.
struct ExperimentConfig {
    EnvConfig env;
    RewardConfig reward;
    RmTrainConfig rm;
    int rm_num_pairs = 2000;
    PolicyConfig policy;
    PPOConfig ppo;
    MetricsConfig metrics;
    GateConfig gate;
    RetrievalOracle oracle;
    std::vector<double> retrieval_grid;
    int retrieval_episodes = 2000;
    std::vector<double> alpha_grid;
    std::vector<std::uint64_t> seeds;
    std::filesystem::path output_dir = "out";
    std::string rm_checkpoint = "rm_checkpoint.json";          // relative to output_dir
    std::string policy_checkpoint = "seed_1/policy.json";      // relative to output_dir

    KeyValueConfig raw;  // the effective snapshot embedded in run records

    static ExperimentConfig from_kv(const KeyValueConfig& kv);

    std::filesystem::path rm_checkpoint_path() const;
    std::filesystem::path policy_checkpoint_path() const;
};

}  // namespace conqord
