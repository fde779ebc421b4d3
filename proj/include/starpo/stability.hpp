#pragma once

#include <string>
#include <vector>

#include "starpo/trajectory.hpp"

namespace starpo {

inline constexpr double kEpsilonPe = 1e-8;     // path-efficiency denominator guard
inline constexpr double kEpsilonNorm = 1e-12;  // below this a delta counts as zero

// Both stability metrics plus per-pair diagnostics for one trajectory.
struct StabilityScores {
    double r_acf = 0.0;                // mean adjacent-delta cosine, 0 if degenerate
    double r_pe = 0.0;                 // D / (L + eps_pe)
    std::vector<double> acf_pairs;     // per-pair cosine values, each in [-1,1]
    double net_displacement = 0.0;     // D = |h_K - h_1|
    double path_length = 0.0;          // L = sum |h_k - h_{k-1}|
    bool degenerate_acf = false;       // true when no valid pair exists (K < 3)
    std::int64_t zero_delta_count = 0; // pairs skipped because a delta was ~zero
};

struct StabilityParams {
    double epsilon_pe = kEpsilonPe;
    double epsilon_norm = kEpsilonNorm;
};

// Empirical tail thresholds estimated from a calibration sample.
struct AbnormalityCalibration {
    double acf_low = 0.0;
    double acf_high = 0.0;
    double pe_low = 0.0;
    double tail_mass = 0.0;
    std::int64_t sample_size = 0;
};

struct AbnormalityFlags {
    bool acf_abnormal_low = false;
    bool acf_abnormal_high = false;
    bool pe_abnormal_low = false;

    bool any() const { return acf_abnormal_low || acf_abnormal_high || pe_abnormal_low; }
    bool operator==(const AbnormalityFlags&) const = default;
};

// Adjacent differences of the step embeddings: row k is h_{k+1} - h_k, K-1 rows.
// Raises TooShort for K < 2.
Matrix step_deltas(const Matrix& steps);

// Cosine similarity of each adjacent delta pair, in order, length rows-1.
// Pairs where either delta has norm below epsilon_norm contribute 0; each such
// pair increments *zero_delta_count when the pointer is given.
// Raises TooFewDeltas for fewer than 2 deltas.
std::vector<double> acf_pairs(const Matrix& deltas, double epsilon_norm = kEpsilonNorm,
                              std::int64_t* zero_delta_count = nullptr);

struct AcfResult {
    double r_acf = 0.0;
    std::vector<double> pairs;
    bool degenerate = false;
    std::int64_t zero_delta_count = 0;
};

// Mean adjacent-delta cosine over the K-2 valid pairs; K < 3 yields the
// neutral value 0 with degenerate = true instead of an error.
AcfResult acf_reward(const Matrix& steps, double epsilon_norm = kEpsilonNorm);

struct PathEfficiencyResult {
    double r_pe = 0.0;
    double net_displacement = 0.0;
    double path_length = 0.0;
};

// r_pe = D / (L + eps_pe) with D the net displacement and L the path length.
// Raises TooShort for K < 2.
PathEfficiencyResult path_efficiency(const Matrix& steps, double epsilon_pe = kEpsilonPe);

// Both metrics at once. Raises TooShort for K < 2.
StabilityScores compute_scores(const Matrix& steps, const StabilityParams& params = {});
StabilityScores compute_scores(const Trajectory& traj, const StabilityParams& params = {});

// Quantile by linear interpolation between order statistics: with the sample
// sorted ascending and h = (n-1)p, returns x[floor(h)] + frac(h) * (x[floor(h)+1]
// - x[floor(h)]). Raises InsufficientSample on an empty sample, InvalidParams
// for p outside [0,1].
double quantile_linear(std::vector<double> values, double p);

// Tail thresholds from a calibration sample: acf_low/acf_high are the
// tail_mass and (1 - tail_mass) quantiles of r_acf, pe_low the tail_mass
// quantile of r_pe. Raises InsufficientSample for fewer than 2 scores,
// InvalidParams unless 0 < tail_mass < 0.5.
AbnormalityCalibration calibrate_abnormality(const std::vector<StabilityScores>& sample,
                                             double tail_mass);

// Strict threshold comparisons; a score exactly at a threshold is not flagged.
// PE has no high tail.
AbnormalityFlags flag_abnormal(const StabilityScores& scores, const AbnormalityCalibration& calib);

// Serialize scores/flags into a trajectory's meta map under the reserved keys
// r_acf, r_pe, D, L, flags (flags as a comma-joined subset of
// acf_low,acf_high,pe_low; empty string when none are set).
void write_scores_meta(Trajectory& traj, const StabilityScores& scores);
void write_flags_meta(Trajectory& traj, const AbnormalityFlags& flags);
AbnormalityFlags flags_from_meta(const Trajectory& traj);

// Calibration round-trips through a small "key = value" text file.
void save_calibration(const AbnormalityCalibration& calib, const std::string& path);
AbnormalityCalibration load_calibration(const std::string& path);

}  // namespace starpo
