#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "starpo/policy.hpp"
#include "starpo/stability.hpp"
#include "starpo/trajectory.hpp"

namespace starpo {

class Environment;

enum class Mode { Grpo, StarpoFull, StarpoAcfOnly, StarpoPeOnly };
const char* mode_name(Mode mode);
Mode mode_from_string(const std::string& s);

enum class RewardShaping { RawAdditive, TailPenalty };
const char* reward_shaping_name(RewardShaping shaping);
RewardShaping reward_shaping_from_string(const std::string& s);

struct SurrogateConfig {
    Mode mode = Mode::StarpoFull;
    double lambda_acf = 0.1;
    double lambda_pe = 0.1;
    double epsilon_clip = 0.2;
    double beta_kl = 0.04;
    RewardShaping reward_shaping = RewardShaping::RawAdditive;
    double penalty_magnitude = 1.0;  // tail_penalty mode only
    double epsilon_std = 1e-8;       // zero-variance group guard
    int group_size = 8;

    // The mode masks the lambdas: grpo zeroes both, the ablations zero one.
    double effective_lambda_acf() const;
    double effective_lambda_pe() const;
    void validate() const;
};

// One sampled decision: the feature rows the policy saw and the index chosen.
struct DecisionPoint {
    Matrix action_features;
    int chosen = 0;
};

struct Rollout {
    Trajectory trajectory;
    double task_reward = 0.0;
    std::vector<DecisionPoint> decisions;
    std::vector<double> logp_old;
    std::optional<std::vector<double>> logp_ref;
    StabilityScores scores;   // filled once the trajectory is scored
    AbnormalityFlags flags;   // filled once a calibration exists

    void validate() const;
};

struct RolloutGroup {
    std::string query_id;
    std::vector<Rollout> rollouts;

    void validate() const;  // G >= 2 and element validity
};

// Composed reward per shaping mode: raw_additive adds lambda-weighted metric
// values, tail_penalty subtracts lambda-weighted flag penalties, grpo passes
// the task reward through.
double compose_reward(double task_reward, const StabilityScores& scores,
                      const AbnormalityFlags& flags, const SurrogateConfig& cfg);

// Group z-scores with population (divide-by-G) standard deviation; a group
// with std below epsilon_std gets all-zero advantages.
std::vector<double> group_advantages(const std::vector<double>& rewards, double epsilon_std);

// exp(logp_new - logp_old). Raises InvalidLogProb on non-finite or positive input.
double importance_ratio(double logp_new, double logp_old);

// Mean over tokens of exp(d) - d - 1 with d = logp_ref - logp_new; >= 0,
// zero iff the lists match. Raises ShapeMismatch on length mismatch.
double kl_estimate(const std::vector<double>& logp_new, const std::vector<double>& logp_ref);

// New log-probabilities for every rollout in a group, aligned with decisions.
using GroupLogp = std::vector<std::vector<double>>;

// Recompute each recorded decision's log-probability under the given policy.
GroupLogp group_logp(const RolloutGroup& group, const ToyPolicy& policy);

// (1/G) sum_i (1/T_i) sum_t min(w A_i, clip(w) A_i) - beta_kl * KLhat, with
// advantages z-scored from composed rewards and KLhat the mean per-token KL
// against logp_ref over the rollouts that carry one.
double clipped_surrogate(const RolloutGroup& group, const GroupLogp& logp_new,
                         const SurrogateConfig& cfg);

// Analytic d/dtheta of clipped_surrogate at the given policy; advantages and
// clip gates are treated as constants, and a token whose min selects the
// clipped branch contributes no gradient.
Vector surrogate_gradient(const RolloutGroup& group, const ToyPolicy& policy,
                          const SurrogateConfig& cfg);

struct TrainParams {
    SurrogateConfig cfg;
    double learning_rate = 0.3;
    int iterations = 300;
    int updates_per_iteration = 1;
    int calibration_window = 100;  // rollouts scored before thresholds freeze
    double tail_mass = 0.1587;
    StabilityParams stability;

    void validate() const;
};

struct IterationStats {
    int iteration = 0;
    double mean_task_reward = 0.0;
    double success_rate = 0.0;
    double mean_r_acf = 0.0;
    double mean_r_pe = 0.0;
    double surrogate = 0.0;
    double kl = 0.0;
    double grad_norm = 0.0;
};

struct TrainingLog {
    std::vector<IterationStats> rows;
};

// CSV with one row per iteration, full-precision numbers.
std::string training_log_to_csv(const TrainingLog& log);

struct TrainResult {
    ToyPolicy policy;
    TrainingLog log;
    std::optional<AbnormalityCalibration> calibration;
};

// GRPO/StaRPO training: per iteration, sample group_size rollouts per query
// from the current policy, score and compose rewards, take ascent steps on the
// surrogate. Deterministic given (seed, params). Raises DivergenceError with
// the iteration index if the parameters leave the finite range.
TrainResult train(const Environment& env, ToyPolicy policy, const TrainParams& params,
                  std::uint64_t seed);

}  // namespace starpo
