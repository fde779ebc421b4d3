#include "starpo/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>

#include "starpo/ioutil.hpp"

namespace starpo {

namespace {

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        raise(Errc::invalid_config, "key '" + key + "': bad number '" + value + "'");
    }
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size())
        raise(Errc::invalid_config, "key '" + key + "': bad integer '" + value + "'");
    return v;
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size())
        raise(Errc::invalid_config, "key '" + key + "': bad unsigned integer '" + value + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    raise(Errc::invalid_config, "key '" + key + "': bad boolean '" + value + "' (use true/false)");
}

struct KeyInfo {
    const char* name;
    const char* description;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

std::string bool_str(bool b) { return b ? "true" : "false"; }

const std::vector<KeyInfo>& key_table() {
    static const std::vector<KeyInfo> table = {
        {"mode", "objective variant: grpo | starpo_full | starpo_acf_only | starpo_pe_only",
         [](RunConfig& c, const std::string& v) { c.surrogate.mode = mode_from_string(v); },
         [](const RunConfig& c) { return std::string(mode_name(c.surrogate.mode)); }},
        {"lambda_acf", "weight of the ACF stability term",
         [](RunConfig& c, const std::string& v) { c.surrogate.lambda_acf = parse_double("lambda_acf", v); },
         [](const RunConfig& c) { return format_double(c.surrogate.lambda_acf); }},
        {"lambda_pe", "weight of the path-efficiency stability term",
         [](RunConfig& c, const std::string& v) { c.surrogate.lambda_pe = parse_double("lambda_pe", v); },
         [](const RunConfig& c) { return format_double(c.surrogate.lambda_pe); }},
        {"epsilon_clip", "surrogate clip range",
         [](RunConfig& c, const std::string& v) { c.surrogate.epsilon_clip = parse_double("epsilon_clip", v); },
         [](const RunConfig& c) { return format_double(c.surrogate.epsilon_clip); }},
        {"beta_kl", "KL regularization coefficient (0 disables)",
         [](RunConfig& c, const std::string& v) { c.surrogate.beta_kl = parse_double("beta_kl", v); },
         [](const RunConfig& c) { return format_double(c.surrogate.beta_kl); }},
        {"reward_shaping", "raw_additive | tail_penalty",
         [](RunConfig& c, const std::string& v) { c.surrogate.reward_shaping = reward_shaping_from_string(v); },
         [](const RunConfig& c) { return std::string(reward_shaping_name(c.surrogate.reward_shaping)); }},
        {"penalty_magnitude", "flag penalty scale in tail_penalty shaping",
         [](RunConfig& c, const std::string& v) { c.surrogate.penalty_magnitude = parse_double("penalty_magnitude", v); },
         [](const RunConfig& c) { return format_double(c.surrogate.penalty_magnitude); }},
        {"epsilon_std", "zero-variance guard for group advantages",
         [](RunConfig& c, const std::string& v) { c.surrogate.epsilon_std = parse_double("epsilon_std", v); },
         [](const RunConfig& c) { return format_double(c.surrogate.epsilon_std); }},
        {"group_size", "rollouts per query per iteration (G)",
         [](RunConfig& c, const std::string& v) { c.surrogate.group_size = static_cast<int>(parse_int("group_size", v)); },
         [](const RunConfig& c) { return std::to_string(c.surrogate.group_size); }},
        {"epsilon_pe", "path-efficiency denominator guard",
         [](RunConfig& c, const std::string& v) { c.stability.epsilon_pe = parse_double("epsilon_pe", v); },
         [](const RunConfig& c) { return format_double(c.stability.epsilon_pe); }},
        {"epsilon_norm", "zero-delta threshold for ACF pairs",
         [](RunConfig& c, const std::string& v) { c.stability.epsilon_norm = parse_double("epsilon_norm", v); },
         [](const RunConfig& c) { return format_double(c.stability.epsilon_norm); }},
        {"temperature", "softmax temperature of the toy policy",
         [](RunConfig& c, const std::string& v) { c.temperature = parse_double("temperature", v); },
         [](const RunConfig& c) { return format_double(c.temperature); }},
        {"learning_rate", "ascent step size",
         [](RunConfig& c, const std::string& v) { c.learning_rate = parse_double("learning_rate", v); },
         [](const RunConfig& c) { return format_double(c.learning_rate); }},
        {"iterations", "training iterations",
         [](RunConfig& c, const std::string& v) { c.iterations = static_cast<int>(parse_int("iterations", v)); },
         [](const RunConfig& c) { return std::to_string(c.iterations); }},
        {"updates_per_iteration", "ascent steps per sampled batch",
         [](RunConfig& c, const std::string& v) { c.updates_per_iteration = static_cast<int>(parse_int("updates_per_iteration", v)); },
         [](const RunConfig& c) { return std::to_string(c.updates_per_iteration); }},
        {"calibration_window", "rollouts scored before abnormality thresholds freeze",
         [](RunConfig& c, const std::string& v) { c.calibration_window = static_cast<int>(parse_int("calibration_window", v)); },
         [](const RunConfig& c) { return std::to_string(c.calibration_window); }},
        {"tail_mass", "abnormality tail mass per side",
         [](RunConfig& c, const std::string& v) { c.tail_mass = parse_double("tail_mass", v); },
         [](const RunConfig& c) { return format_double(c.tail_mass); }},
        {"puzzles", "puzzle file path (empty uses the builtin pool)",
         [](RunConfig& c, const std::string& v) { c.puzzles = v; },
         [](const RunConfig& c) { return c.puzzles; }},
        {"eight_step", "interleave statement embeddings into 8-step trajectories",
         [](RunConfig& c, const std::string& v) { c.eight_step = parse_bool("eight_step", v); },
         [](const RunConfig& c) { return bool_str(c.eight_step); }},
        {"embed_dim", "state embedding dimension",
         [](RunConfig& c, const std::string& v) { c.embed_dim = static_cast<int>(parse_int("embed_dim", v)); },
         [](const RunConfig& c) { return std::to_string(c.embed_dim); }},
        {"embed_seed", "seed of the fixed state-embedding projection",
         [](RunConfig& c, const std::string& v) { c.embed_seed = parse_uint("embed_seed", v); },
         [](const RunConfig& c) { return std::to_string(c.embed_seed); }},
        {"gen_steps", "synthetic generator steps (K)",
         [](RunConfig& c, const std::string& v) { c.gen_steps = static_cast<int>(parse_int("gen_steps", v)); },
         [](const RunConfig& c) { return std::to_string(c.gen_steps); }},
        {"gen_dim", "synthetic generator embedding dimension",
         [](RunConfig& c, const std::string& v) { c.gen_dim = static_cast<int>(parse_int("gen_dim", v)); },
         [](const RunConfig& c) { return std::to_string(c.gen_dim); }},
        {"gen_noise", "synthetic generator noise scale",
         [](RunConfig& c, const std::string& v) { c.gen_noise = parse_double("gen_noise", v); },
         [](const RunConfig& c) { return format_double(c.gen_noise); }},
        {"samples_per_class", "synthetic corpus size per class",
         [](RunConfig& c, const std::string& v) { c.samples_per_class = static_cast<int>(parse_int("samples_per_class", v)); },
         [](const RunConfig& c) { return std::to_string(c.samples_per_class); }},
        {"dump_corpus", "also write the generated corpus as a trajectory file",
         [](RunConfig& c, const std::string& v) { c.dump_corpus = parse_bool("dump_corpus", v); },
         [](const RunConfig& c) { return bool_str(c.dump_corpus); }},
        {"alpha", "significance level of the association study",
         [](RunConfig& c, const std::string& v) { c.alpha = parse_double("alpha", v); },
         [](const RunConfig& c) { return format_double(c.alpha); }},
        {"seed", "master random seed",
         [](RunConfig& c, const std::string& v) { c.seed = parse_uint("seed", v); },
         [](const RunConfig& c) { return std::to_string(c.seed); }},
        {"out_dir", "output directory",
         [](RunConfig& c, const std::string& v) { c.out_dir = v; },
         [](const RunConfig& c) { return c.out_dir; }},
    };
    return table;
}

}  // namespace

void RunConfig::validate() const {
    surrogate.validate();
    if (!(stability.epsilon_pe > 0.0)) raise(Errc::invalid_config, "epsilon_pe must be positive");
    if (!(stability.epsilon_norm > 0.0))
        raise(Errc::invalid_config, "epsilon_norm must be positive");
    if (!(temperature > 0.0)) raise(Errc::invalid_config, "temperature must be positive");
    if (!(learning_rate > 0.0)) raise(Errc::invalid_config, "learning_rate must be positive");
    if (iterations < 0) raise(Errc::invalid_config, "iterations must be non-negative");
    if (updates_per_iteration < 1)
        raise(Errc::invalid_config, "updates_per_iteration must be at least 1");
    if (calibration_window < 2)
        raise(Errc::invalid_config, "calibration_window must be at least 2");
    if (!(tail_mass > 0.0 && tail_mass < 0.5))
        raise(Errc::invalid_config, "tail_mass must lie in (0, 0.5)");
    if (embed_dim < 2) raise(Errc::invalid_config, "embed_dim must be at least 2");
    if (gen_steps < 3) raise(Errc::invalid_config, "gen_steps must be at least 3");
    if (gen_dim < 2) raise(Errc::invalid_config, "gen_dim must be at least 2");
    if (gen_noise < 0.0) raise(Errc::invalid_config, "gen_noise must be non-negative");
    if (samples_per_class < 1) raise(Errc::invalid_config, "samples_per_class must be at least 1");
    if (!(alpha > 0.0 && alpha < 1.0)) raise(Errc::invalid_config, "alpha must lie in (0,1)");
    if (out_dir.empty()) raise(Errc::invalid_config, "out_dir must not be empty");
}

void config_set(RunConfig& config, const std::string& key, const std::string& value) {
    for (const auto& info : key_table()) {
        if (key == info.name) {
            info.set(config, value);
            return;
        }
    }
    raise(Errc::invalid_config, "unknown config key '" + key + "'");
}

RunConfig load_config_file(const std::string& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) raise(Errc::io_error, "cannot open config file: " + path);

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto strip = [](const std::string& s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        if (strip(line).empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            raise(Errc::invalid_config,
                  path + ":" + std::to_string(lineno) + ": expected key = value");
        try {
            config_set(base, strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
        } catch (const Error& e) {
            raise(e.code(), path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return base;
}

RunConfig build_config(const std::optional<std::string>& config_file,
                       const std::vector<std::pair<std::string, std::string>>& overrides) {
    RunConfig config;
    if (config_file) config = load_config_file(*config_file, config);
    for (const auto& [key, value] : overrides) config_set(config, key, value);
    config.validate();
    return config;
}

std::string config_to_string(const RunConfig& config) {
    std::string out;
    for (const auto& info : key_table()) {
        out += info.name;
        out += " = ";
        out += info.get(config);
        out += '\n';
    }
    return out;
}

std::string config_keys_help() {
    const RunConfig defaults;
    std::string out;
    for (const auto& info : key_table()) {
        out += info.name;
        out += '\t';
        out += info.get(defaults);
        out += '\t';
        out += info.description;
        out += '\n';
    }
    return out;
}

}  // namespace starpo
