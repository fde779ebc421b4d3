#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "starpo/config.hpp"
#include "starpo/env.hpp"
#include "starpo/stats.hpp"

namespace starpo {

struct AnalyzeArgs {
    std::string input;
    std::string output;
    std::optional<std::string> calibration;  // enables abnormality flags
    bool want_flags = false;                 // error when set without calibration
    StabilityParams stability;
};

// Annotates every trajectory with r_acf, r_pe, D, L (and flags when a
// calibration is given), writes the annotated file, prints a summary.
void cmd_analyze(const AnalyzeArgs& args, std::ostream& summary);

struct CalibrateArgs {
    std::string input;
    std::string output;
    double tail_mass = 0.1587;
    StabilityParams stability;
};

// Estimates abnormality thresholds from a trajectory file and writes them.
void cmd_calibrate(const CalibrateArgs& args, std::ostream& summary);

struct TrainOutputs {
    std::string log_path;
    std::string policy_path;
};

// Trains per the config, writes <out_dir>/train_<mode>.csv and
// <out_dir>/policy_<mode>.txt.
TrainOutputs cmd_train(const RunConfig& config, std::ostream& summary);

struct ValidateOutputs {
    std::string csv_path;
    std::string table_path;
    SignificanceReport report;
};

// Generates the labeled synthetic corpus, calibrates on the stable subset,
// runs the association study, writes CSV and aligned-table files (and the
// corpus itself when dump_corpus is set).
ValidateOutputs cmd_validate(const RunConfig& config, std::ostream& summary);

// Prints solvability and every distinct solution of one puzzle.
void cmd_solve24(const std::array<int, 4>& puzzle, std::ostream& out);

struct ReportOutputs {
    std::string summary_path;
    std::string plot_path;
};

// Summarizes one or more training logs into a comparison CSV plus long-format
// per-iteration plot data. Raises SchemaError on malformed or non-finite logs.
ReportOutputs cmd_report(const std::vector<std::string>& log_paths, const std::string& out_dir,
                         std::ostream& summary);

// --- helpers shared between commands and tests ---

void save_policy(const ToyPolicy& policy, const std::string& path);
ToyPolicy load_policy(const std::string& path);

// Environment and trainer parameters implied by a config.
Game24Env make_env(const RunConfig& config);
TrainParams train_params_from(const RunConfig& config);

// Strict parse of a training CSV (exact header, finite values).
std::vector<IterationStats> parse_training_csv(const std::string& path);

// Averages over the last max(1, n/10) iterations; zeros for an empty log.
struct LogSummary {
    int iterations = 0;
    double final_success_rate = 0.0;
    double final_mean_task_reward = 0.0;
    double final_mean_r_acf = 0.0;
    double final_mean_r_pe = 0.0;
};
LogSummary summarize_log(const std::vector<IterationStats>& rows);

// Labeled samples for the association study: scores everything, calibrates on
// the label-None subset, flags everything with those thresholds.
struct StudyInputs {
    std::vector<LabeledSample> samples;
    AbnormalityCalibration calibration;
};
StudyInputs corpus_to_study_inputs(const std::vector<Trajectory>& corpus, double tail_mass,
                                   const StabilityParams& stability);

}  // namespace starpo
