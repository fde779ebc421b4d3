#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "starpo/policy_opt.hpp"
#include "starpo/stability.hpp"

namespace starpo {

// Every tunable of the pipeline, with documented defaults. Config files and
// CLI overrides address fields by the exact key names listed in config_keys().
struct RunConfig {
    // surrogate / training
    SurrogateConfig surrogate;
    StabilityParams stability;
    double temperature = 1.0;
    double learning_rate = 0.3;
    int iterations = 300;
    int updates_per_iteration = 1;
    int calibration_window = 100;
    double tail_mass = 0.1587;
    // environment
    std::string puzzles;  // puzzle file path; empty -> builtin pool
    bool eight_step = false;
    int embed_dim = 8;
    std::uint64_t embed_seed = 2024;
    // synthetic corpus
    int gen_steps = 8;
    int gen_dim = 16;
    double gen_noise = 0.05;
    int samples_per_class = 500;
    bool dump_corpus = false;
    // study
    double alpha = 0.05;
    // run plumbing
    std::uint64_t seed = 0;
    std::string out_dir = "out";

    void validate() const;
};

// Sets one field by key. Raises InvalidConfig on unknown keys or unparsable
// values.
void config_set(RunConfig& config, const std::string& key, const std::string& value);

// Flat "key = value" file with '#' comments and blank lines; applied over the
// given base in file order.
RunConfig load_config_file(const std::string& path, RunConfig base = {});

// defaults -> optional config file -> overrides, in that precedence order.
RunConfig build_config(const std::optional<std::string>& config_file,
                       const std::vector<std::pair<std::string, std::string>>& overrides);

// All keys with current values, one "key = value" line each, in fixed order.
// A RunConfig round-trips through this form.
std::string config_to_string(const RunConfig& config);

// "key<TAB>default<TAB>description" lines for help output.
std::string config_keys_help();

}  // namespace starpo
