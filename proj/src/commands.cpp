#include "starpo/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "starpo/generators.hpp"
#include "starpo/ioutil.hpp"

namespace starpo {

namespace {

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) raise(Errc::io_error, "cannot create output directory '" + dir + "': " + ec.message());
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

// Console rendering only; file artifacts keep full-precision format_double.
std::string display(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", value);
    return buf;
}

}  // namespace

void cmd_analyze(const AnalyzeArgs& args, std::ostream& summary) {
    if (args.want_flags && !args.calibration)
        raise(Errc::invalid_params,
              "flag annotation needs a calibration file; run `starpo calibrate` first and pass "
              "--calibration");

    std::optional<AbnormalityCalibration> calib;
    if (args.calibration) calib = load_calibration(*args.calibration);

    std::vector<Trajectory> trajectories = load_trajectories(args.input);
    double sum_acf = 0.0, sum_pe = 0.0;
    std::int64_t n_acf_low = 0, n_acf_high = 0, n_pe_low = 0;
    for (Trajectory& traj : trajectories) {
        const StabilityScores scores = compute_scores(traj, args.stability);
        write_scores_meta(traj, scores);
        sum_acf += scores.r_acf;
        sum_pe += scores.r_pe;
        if (calib) {
            const AbnormalityFlags flags = flag_abnormal(scores, *calib);
            write_flags_meta(traj, flags);
            n_acf_low += flags.acf_abnormal_low ? 1 : 0;
            n_acf_high += flags.acf_abnormal_high ? 1 : 0;
            n_pe_low += flags.pe_abnormal_low ? 1 : 0;
        }
    }
    save_trajectories(trajectories, args.output);

    const std::size_t n = trajectories.size();
    summary << "analyzed " << n << " trajectories -> " << args.output << "\n";
    if (n > 0) {
        summary << "mean r_acf = " << display(sum_acf / static_cast<double>(n))
                << ", mean r_pe = " << display(sum_pe / static_cast<double>(n)) << "\n";
    }
    if (calib) {
        summary << "flagged: acf_low " << n_acf_low << ", acf_high " << n_acf_high << ", pe_low "
                << n_pe_low << "\n";
    }
}

void cmd_calibrate(const CalibrateArgs& args, std::ostream& summary) {
    const std::vector<Trajectory> trajectories = load_trajectories(args.input);
    std::vector<StabilityScores> scores;
    scores.reserve(trajectories.size());
    for (const Trajectory& traj : trajectories) scores.push_back(compute_scores(traj, args.stability));
    const AbnormalityCalibration calib = calibrate_abnormality(scores, args.tail_mass);
    save_calibration(calib, args.output);
    summary << "calibrated on " << calib.sample_size << " trajectories -> " << args.output << "\n"
            << "acf_low = " << display(calib.acf_low)
            << ", acf_high = " << display(calib.acf_high)
            << ", pe_low = " << display(calib.pe_low) << "\n";
}

Game24Env make_env(const RunConfig& config) {
    Game24EnvConfig env_cfg;
    env_cfg.puzzles = config.puzzles.empty() ? default_puzzle_pool() : load_puzzles(config.puzzles);
    env_cfg.embed_dim = config.embed_dim;
    env_cfg.embed_seed = config.embed_seed;
    env_cfg.eight_step = config.eight_step;
    return Game24Env(std::move(env_cfg));
}

TrainParams train_params_from(const RunConfig& config) {
    TrainParams params;
    params.cfg = config.surrogate;
    params.learning_rate = config.learning_rate;
    params.iterations = config.iterations;
    params.updates_per_iteration = config.updates_per_iteration;
    params.calibration_window = config.calibration_window;
    params.tail_mass = config.tail_mass;
    params.stability = config.stability;
    return params;
}

void save_policy(const ToyPolicy& policy, const std::string& path) {
    std::string out;
    out += "dim = " + std::to_string(policy.theta.size()) + "\n";
    out += "temperature = " + format_double(policy.temperature) + "\n";
    out += "theta =";
    for (Eigen::Index i = 0; i < policy.theta.size(); ++i) {
        out += ' ';
        out += format_double(policy.theta(i));
    }
    out += '\n';
    atomic_write_file(path, out);
}

ToyPolicy load_policy(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::io_error, "cannot open: " + path);

    ToyPolicy policy;
    Eigen::Index dim = -1;
    std::string line;
    while (std::getline(in, line)) {
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(0, line.find(' '));
        std::istringstream rest(line.substr(eq + 1));
        if (key == "dim") {
            rest >> dim;
        } else if (key == "temperature") {
            rest >> policy.temperature;
        } else if (key == "theta") {
            std::vector<double> values;
            double v = 0.0;
            while (rest >> v) values.push_back(v);
            policy.theta.resize(static_cast<Eigen::Index>(values.size()));
            for (std::size_t i = 0; i < values.size(); ++i)
                policy.theta(static_cast<Eigen::Index>(i)) = values[i];
        } else {
            raise(Errc::schema_error, path + ": unknown policy key '" + key + "'");
        }
    }
    if (dim < 0 || policy.theta.size() != dim)
        raise(Errc::schema_error, path + ": theta length does not match dim");
    policy.validate();
    return policy;
}

TrainOutputs cmd_train(const RunConfig& config, std::ostream& summary) {
    config.validate();
    ensure_out_dir(config.out_dir);

    const Game24Env env = make_env(config);
    ToyPolicy policy;
    policy.theta = Vector::Zero(env.feature_dim());
    policy.temperature = config.temperature;

    const TrainResult result = train(env, policy, train_params_from(config), config.seed);

    const std::string mode = mode_name(config.surrogate.mode);
    TrainOutputs outputs;
    outputs.log_path = join_path(config.out_dir, "train_" + mode + ".csv");
    outputs.policy_path = join_path(config.out_dir, "policy_" + mode + ".txt");
    atomic_write_file(outputs.log_path, training_log_to_csv(result.log));
    save_policy(result.policy, outputs.policy_path);

    summary << "trained mode " << mode << " for " << result.log.rows.size() << " iterations -> "
            << outputs.log_path << "\n";
    const LogSummary final = summarize_log(result.log.rows);
    if (final.iterations > 0) {
        summary << "final success_rate = " << display(final.final_success_rate)
                << ", mean r_acf = " << display(final.final_mean_r_acf)
                << ", mean r_pe = " << display(final.final_mean_r_pe) << "\n";
    }
    return outputs;
}

StudyInputs corpus_to_study_inputs(const std::vector<Trajectory>& corpus, double tail_mass,
                                   const StabilityParams& stability) {
    StudyInputs inputs;
    inputs.samples.reserve(corpus.size());
    std::vector<StabilityScores> stable_scores;
    for (const Trajectory& traj : corpus) {
        LabeledSample sample;
        sample.scores = compute_scores(traj, stability);
        sample.label = traj.label;
        if (traj.label == ErrorLabel::None) stable_scores.push_back(sample.scores);
        inputs.samples.push_back(std::move(sample));
    }
    inputs.calibration = calibrate_abnormality(stable_scores, tail_mass);
    for (LabeledSample& sample : inputs.samples)
        sample.flags = flag_abnormal(sample.scores, inputs.calibration);
    return inputs;
}

ValidateOutputs cmd_validate(const RunConfig& config, std::ostream& summary) {
    config.validate();
    ensure_out_dir(config.out_dir);

    CorpusParams corpus_params;
    corpus_params.per_class = config.samples_per_class;
    corpus_params.steps = config.gen_steps;
    corpus_params.dim = config.gen_dim;
    corpus_params.noise_scale = config.gen_noise;
    corpus_params.seed = config.seed;
    std::vector<Trajectory> corpus = gen_corpus(corpus_params);

    StudyInputs inputs = corpus_to_study_inputs(corpus, config.tail_mass, config.stability);
    save_calibration(inputs.calibration, join_path(config.out_dir, "calibration.txt"));

    if (config.dump_corpus) {
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            write_scores_meta(corpus[i], inputs.samples[i].scores);
            write_flags_meta(corpus[i], inputs.samples[i].flags);
        }
        save_trajectories(corpus, join_path(config.out_dir, "corpus.jsonl"));
    }

    ValidateOutputs outputs;
    outputs.report = association_study(inputs.samples, config.alpha);
    outputs.csv_path = join_path(config.out_dir, "study.csv");
    outputs.table_path = join_path(config.out_dir, "study.txt");
    atomic_write_file(outputs.csv_path, report_to_csv(outputs.report));
    const std::string table = report_to_table(outputs.report);
    atomic_write_file(outputs.table_path, table);

    summary << "study over " << inputs.samples.size() << " samples (alpha = "
            << display(outputs.report.alpha) << ") -> " << outputs.csv_path << "\n"
            << table;
    return outputs;
}

void cmd_solve24(const std::array<int, 4>& puzzle, std::ostream& out) {
    const SolveResult result = game24_solve(puzzle);
    out << "puzzle: " << puzzle_to_string(puzzle) << "\n";
    if (!result.solvable) {
        out << "no solution\n";
        return;
    }
    out << result.solutions.size() << " distinct solutions\n";
    for (const ExprPtr& expr : result.solutions) out << expr_to_string(*expr) << " = 24\n";
}

namespace {

constexpr const char* kLogHeader =
    "iteration,mean_task_reward,success_rate,mean_r_acf,mean_r_pe,surrogate,kl,grad_norm";

std::string log_stem(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

}  // namespace

std::vector<IterationStats> parse_training_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::io_error, "cannot open: " + path);

    std::string line;
    if (!std::getline(in, line)) raise(Errc::schema_error, path + ": empty file");
    if (line == std::string(kLogHeader) + "\r") line.pop_back();
    if (line != kLogHeader)
        raise(Errc::schema_error, path + ": unexpected header '" + line + "'");

    std::vector<IterationStats> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> fields;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                const double v = std::stod(cell, &used);
                if (used != cell.size()) throw std::invalid_argument(cell);
                fields.push_back(v);
            } catch (const std::exception&) {
                raise(Errc::schema_error,
                      path + ":" + std::to_string(lineno) + ": bad value '" + cell + "'");
            }
        }
        if (fields.size() != 8)
            raise(Errc::schema_error, path + ":" + std::to_string(lineno) + ": expected 8 columns");
        for (double v : fields)
            if (!std::isfinite(v))
                raise(Errc::schema_error,
                      path + ":" + std::to_string(lineno) + ": non-finite value");
        IterationStats row;
        row.iteration = static_cast<int>(fields[0]);
        row.mean_task_reward = fields[1];
        row.success_rate = fields[2];
        row.mean_r_acf = fields[3];
        row.mean_r_pe = fields[4];
        row.surrogate = fields[5];
        row.kl = fields[6];
        row.grad_norm = fields[7];
        rows.push_back(row);
    }
    return rows;
}

LogSummary summarize_log(const std::vector<IterationStats>& rows) {
    LogSummary out;
    out.iterations = static_cast<int>(rows.size());
    if (rows.empty()) return out;
    const std::size_t tail = std::max<std::size_t>(1, rows.size() / 10);
    for (std::size_t i = rows.size() - tail; i < rows.size(); ++i) {
        out.final_success_rate += rows[i].success_rate;
        out.final_mean_task_reward += rows[i].mean_task_reward;
        out.final_mean_r_acf += rows[i].mean_r_acf;
        out.final_mean_r_pe += rows[i].mean_r_pe;
    }
    const double denom = static_cast<double>(tail);
    out.final_success_rate /= denom;
    out.final_mean_task_reward /= denom;
    out.final_mean_r_acf /= denom;
    out.final_mean_r_pe /= denom;
    return out;
}

ReportOutputs cmd_report(const std::vector<std::string>& log_paths, const std::string& out_dir,
                         std::ostream& summary) {
    if (log_paths.empty()) raise(Errc::invalid_params, "report needs at least one training log");
    ensure_out_dir(out_dir);

    std::string comparison =
        "log,iterations,final_success_rate,final_mean_task_reward,final_mean_r_acf,"
        "final_mean_r_pe\n";
    std::string plot = std::string("log,") + kLogHeader + "\n";
    std::vector<std::pair<std::string, LogSummary>> summaries;
    for (const std::string& path : log_paths) {
        const std::vector<IterationStats> rows = parse_training_csv(path);
        const LogSummary s = summarize_log(rows);
        const std::string stem = log_stem(path);
        summaries.emplace_back(stem, s);
        comparison += stem + ',' + std::to_string(s.iterations) + ',' +
                      format_double(s.final_success_rate) + ',' +
                      format_double(s.final_mean_task_reward) + ',' +
                      format_double(s.final_mean_r_acf) + ',' +
                      format_double(s.final_mean_r_pe) + '\n';
        for (const IterationStats& row : rows) {
            plot += stem;
            plot += ',' + std::to_string(row.iteration);
            for (double v : {row.mean_task_reward, row.success_rate, row.mean_r_acf,
                             row.mean_r_pe, row.surrogate, row.kl, row.grad_norm}) {
                plot += ',';
                plot += format_double(v);
            }
            plot += '\n';
        }
    }

    ReportOutputs outputs;
    outputs.summary_path = join_path(out_dir, "report_summary.csv");
    outputs.plot_path = join_path(out_dir, "report_plot.csv");
    atomic_write_file(outputs.summary_path, comparison);
    atomic_write_file(outputs.plot_path, plot);

    std::size_t name_width = 3;  // "log"
    for (const auto& [stem, s] : summaries)
        name_width = std::min<std::size_t>(120, std::max(name_width, stem.size()));
    char buf[200];
    std::snprintf(buf, sizeof buf, "%-*s iters  success  task     r_acf    r_pe\n",
                  static_cast<int>(name_width), "log");
    summary << buf;
    for (const auto& [stem, s] : summaries) {
        std::snprintf(buf, sizeof buf, "%-*s %-6d %-8.4f %-8.4f %-8.4f %-8.4f\n",
                      static_cast<int>(name_width), stem.c_str(), s.iterations,
                      s.final_success_rate, s.final_mean_task_reward, s.final_mean_r_acf,
                      s.final_mean_r_pe);
        summary << buf;
    }
    summary << "-> " << outputs.summary_path << ", " << outputs.plot_path << "\n";
    return outputs;
}

}  // namespace starpo
