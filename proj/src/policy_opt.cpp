#include "starpo/policy_opt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "starpo/env.hpp"
#include "starpo/ioutil.hpp"

namespace starpo {

const char* mode_name(Mode mode) {
    switch (mode) {
        case Mode::Grpo: return "grpo";
        case Mode::StarpoFull: return "starpo_full";
        case Mode::StarpoAcfOnly: return "starpo_acf_only";
        case Mode::StarpoPeOnly: return "starpo_pe_only";
    }
    return "?";
}

Mode mode_from_string(const std::string& s) {
    if (s == "grpo") return Mode::Grpo;
    if (s == "starpo_full") return Mode::StarpoFull;
    if (s == "starpo_acf_only") return Mode::StarpoAcfOnly;
    if (s == "starpo_pe_only") return Mode::StarpoPeOnly;
    raise(Errc::invalid_config, "unknown mode '" + s + "'");
}

const char* reward_shaping_name(RewardShaping shaping) {
    switch (shaping) {
        case RewardShaping::RawAdditive: return "raw_additive";
        case RewardShaping::TailPenalty: return "tail_penalty";
    }
    return "?";
}

RewardShaping reward_shaping_from_string(const std::string& s) {
    if (s == "raw_additive") return RewardShaping::RawAdditive;
    if (s == "tail_penalty") return RewardShaping::TailPenalty;
    raise(Errc::invalid_config, "unknown reward_shaping '" + s + "'");
}

double SurrogateConfig::effective_lambda_acf() const {
    return (mode == Mode::StarpoFull || mode == Mode::StarpoAcfOnly) ? lambda_acf : 0.0;
}

double SurrogateConfig::effective_lambda_pe() const {
    return (mode == Mode::StarpoFull || mode == Mode::StarpoPeOnly) ? lambda_pe : 0.0;
}

void SurrogateConfig::validate() const {
    if (lambda_acf < 0.0 || lambda_pe < 0.0)
        raise(Errc::invalid_config, "lambda_acf and lambda_pe must be non-negative");
    if (!(epsilon_clip > 0.0)) raise(Errc::invalid_config, "epsilon_clip must be positive");
    if (beta_kl < 0.0) raise(Errc::invalid_config, "beta_kl must be non-negative");
    if (penalty_magnitude < 0.0)
        raise(Errc::invalid_config, "penalty_magnitude must be non-negative");
    if (!(epsilon_std > 0.0)) raise(Errc::invalid_config, "epsilon_std must be positive");
    if (group_size < 2) raise(Errc::invalid_config, "group_size must be at least 2");
}

void Rollout::validate() const {
    if (decisions.empty()) raise(Errc::invalid_trajectory, "rollout with no decisions");
    if (logp_old.size() != decisions.size())
        raise(Errc::shape_mismatch, "logp_old length does not match decision count");
    if (logp_ref && logp_ref->size() != decisions.size())
        raise(Errc::shape_mismatch, "logp_ref length does not match decision count");
    auto check_logp = [](const std::vector<double>& v, const char* what) {
        for (double lp : v)
            if (!std::isfinite(lp) || lp > 0.0)
                raise(Errc::invalid_log_prob, std::string(what) + " must be finite and <= 0");
    };
    check_logp(logp_old, "logp_old");
    if (logp_ref) check_logp(*logp_ref, "logp_ref");
    for (const auto& d : decisions)
        if (d.chosen < 0 || d.chosen >= d.action_features.rows())
            raise(Errc::illegal_action, "recorded action index out of range");
    if (!std::isfinite(task_reward) || task_reward < 0.0 || task_reward > 1.0)
        raise(Errc::invalid_trajectory, "task_reward outside [0,1]");
}

void RolloutGroup::validate() const {
    if (rollouts.size() < 2)
        raise(Errc::invalid_params, "a rollout group needs at least 2 rollouts");
    for (const auto& r : rollouts) r.validate();
}

double compose_reward(double task_reward, const StabilityScores& scores,
                      const AbnormalityFlags& flags, const SurrogateConfig& cfg) {
    const double la = cfg.effective_lambda_acf();
    const double lp = cfg.effective_lambda_pe();
    if (cfg.mode == Mode::Grpo) return task_reward;
    if (cfg.reward_shaping == RewardShaping::RawAdditive)
        return task_reward + la * scores.r_acf + lp * scores.r_pe;
    const bool acf_flagged = flags.acf_abnormal_low || flags.acf_abnormal_high;
    return task_reward - cfg.penalty_magnitude *
                             (la * (acf_flagged ? 1.0 : 0.0) +
                              lp * (flags.pe_abnormal_low ? 1.0 : 0.0));
}

std::vector<double> group_advantages(const std::vector<double>& rewards, double epsilon_std) {
    if (rewards.size() < 2)
        raise(Errc::invalid_params, "advantages need a group of at least 2 rewards");
    const double n = static_cast<double>(rewards.size());
    const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
    double ss = 0.0;
    for (double r : rewards) ss += (r - mean) * (r - mean);
    const double std_pop = std::sqrt(ss / n);
    std::vector<double> adv(rewards.size(), 0.0);
    if (std_pop < epsilon_std) return adv;
    for (std::size_t i = 0; i < rewards.size(); ++i) adv[i] = (rewards[i] - mean) / std_pop;
    return adv;
}

double importance_ratio(double logp_new, double logp_old) {
    if (!std::isfinite(logp_new) || !std::isfinite(logp_old) || logp_new > 0.0 || logp_old > 0.0)
        raise(Errc::invalid_log_prob, "log-probabilities must be finite and <= 0");
    return std::exp(logp_new - logp_old);
}

double kl_estimate(const std::vector<double>& logp_new, const std::vector<double>& logp_ref) {
    if (logp_new.size() != logp_ref.size())
        raise(Errc::shape_mismatch, "kl_estimate over lists of different length");
    if (logp_new.empty()) raise(Errc::shape_mismatch, "kl_estimate over empty lists");
    double total = 0.0;
    for (std::size_t t = 0; t < logp_new.size(); ++t) {
        const double d = logp_ref[t] - logp_new[t];
        total += std::expm1(d) - d;  // exp(d) - d - 1, accurate near 0
    }
    return total / static_cast<double>(logp_new.size());
}

namespace {

std::vector<double> composed_group_rewards(const RolloutGroup& group, const SurrogateConfig& cfg) {
    std::vector<double> rewards;
    rewards.reserve(group.rollouts.size());
    for (const auto& r : group.rollouts)
        rewards.push_back(compose_reward(r.task_reward, r.scores, r.flags, cfg));
    return rewards;
}

double group_kl(const RolloutGroup& group, const GroupLogp& logp_new) {
    double total = 0.0;
    std::size_t with_ref = 0;
    for (std::size_t i = 0; i < group.rollouts.size(); ++i) {
        if (!group.rollouts[i].logp_ref) continue;
        total += kl_estimate(logp_new[i], *group.rollouts[i].logp_ref);
        ++with_ref;
    }
    return with_ref == 0 ? 0.0 : total / static_cast<double>(with_ref);
}

}  // namespace

GroupLogp group_logp(const RolloutGroup& group, const ToyPolicy& policy) {
    GroupLogp out;
    out.reserve(group.rollouts.size());
    for (const auto& r : group.rollouts) {
        std::vector<double> lps;
        lps.reserve(r.decisions.size());
        for (const auto& d : r.decisions)
            lps.push_back(policy_logp(policy, d.action_features, d.chosen));
        out.push_back(std::move(lps));
    }
    return out;
}

double clipped_surrogate(const RolloutGroup& group, const GroupLogp& logp_new,
                         const SurrogateConfig& cfg) {
    cfg.validate();
    group.validate();
    if (logp_new.size() != group.rollouts.size())
        raise(Errc::shape_mismatch, "logp_new has wrong rollout count");

    const std::vector<double> adv = group_advantages(composed_group_rewards(group, cfg),
                                                     cfg.epsilon_std);
    const double G = static_cast<double>(group.rollouts.size());
    double objective = 0.0;
    for (std::size_t i = 0; i < group.rollouts.size(); ++i) {
        const Rollout& r = group.rollouts[i];
        if (logp_new[i].size() != r.decisions.size())
            raise(Errc::shape_mismatch, "logp_new misaligned with rollout decisions");
        double per_token = 0.0;
        for (std::size_t t = 0; t < r.decisions.size(); ++t) {
            const double w = importance_ratio(logp_new[i][t], r.logp_old[t]);
            const double clipped = std::clamp(w, 1.0 - cfg.epsilon_clip, 1.0 + cfg.epsilon_clip);
            per_token += std::min(w * adv[i], clipped * adv[i]);
        }
        objective += per_token / static_cast<double>(r.decisions.size());
    }
    objective /= G;
    if (cfg.beta_kl > 0.0) objective -= cfg.beta_kl * group_kl(group, logp_new);
    return objective;
}

Vector surrogate_gradient(const RolloutGroup& group, const ToyPolicy& policy,
                          const SurrogateConfig& cfg) {
    cfg.validate();
    group.validate();
    policy.validate();

    const std::vector<double> adv = group_advantages(composed_group_rewards(group, cfg),
                                                     cfg.epsilon_std);
    const double G = static_cast<double>(group.rollouts.size());
    std::size_t with_ref = 0;
    for (const auto& r : group.rollouts)
        if (r.logp_ref) ++with_ref;

    Vector grad = Vector::Zero(policy.theta.size());
    for (std::size_t i = 0; i < group.rollouts.size(); ++i) {
        const Rollout& r = group.rollouts[i];
        const double T = static_cast<double>(r.decisions.size());
        for (std::size_t t = 0; t < r.decisions.size(); ++t) {
            const DecisionPoint& d = r.decisions[t];
            const double logp = policy_logp(policy, d.action_features, d.chosen);
            const double w = importance_ratio(logp, r.logp_old[t]);
            const double clipped = std::clamp(w, 1.0 - cfg.epsilon_clip, 1.0 + cfg.epsilon_clip);
            // gradient flows only where the min keeps the unclipped branch
            double coeff = 0.0;
            if (w * adv[i] <= clipped * adv[i]) coeff += adv[i] * w / (G * T);
            if (cfg.beta_kl > 0.0 && r.logp_ref) {
                const double delta = (*r.logp_ref)[t] - logp;
                coeff -= cfg.beta_kl * (1.0 - std::exp(delta)) /
                         (static_cast<double>(with_ref) * T);
            }
            if (coeff != 0.0) grad += coeff * policy_grad_logp(policy, d.action_features, d.chosen);
        }
    }
    return grad;
}

void TrainParams::validate() const {
    cfg.validate();
    if (!(learning_rate > 0.0)) raise(Errc::invalid_config, "learning_rate must be positive");
    if (iterations < 0) raise(Errc::invalid_config, "iterations must be non-negative");
    if (updates_per_iteration < 1)
        raise(Errc::invalid_config, "updates_per_iteration must be at least 1");
    if (calibration_window < 2)
        raise(Errc::invalid_config, "calibration_window must be at least 2");
    if (!(tail_mass > 0.0 && tail_mass < 0.5))
        raise(Errc::invalid_config, "tail_mass must lie in (0, 0.5)");
}

std::string training_log_to_csv(const TrainingLog& log) {
    std::string out =
        "iteration,mean_task_reward,success_rate,mean_r_acf,mean_r_pe,surrogate,kl,grad_norm\n";
    for (const auto& row : log.rows) {
        out += std::to_string(row.iteration);
        for (double v : {row.mean_task_reward, row.success_rate, row.mean_r_acf, row.mean_r_pe,
                         row.surrogate, row.kl, row.grad_norm}) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

TrainResult train(const Environment& env, ToyPolicy policy, const TrainParams& params,
                  std::uint64_t seed) {
    params.validate();
    policy.validate();
    if (env.query_count() == 0) raise(Errc::invalid_params, "environment has no queries");
    if (policy.theta.size() != env.feature_dim())
        raise(Errc::dim_mismatch, "policy dimension does not match environment feature_dim");

    const ToyPolicy reference = policy;  // KL anchor: the initial policy
    const bool want_ref = params.cfg.beta_kl > 0.0;

    TrainResult result;
    std::vector<StabilityScores> calib_buffer;
    std::optional<AbnormalityCalibration> calibration;

    for (int iter = 0; iter < params.iterations; ++iter) {
        // --- sample one group per query from the current (old) policy
        std::vector<RolloutGroup> groups;
        groups.reserve(env.query_count());
        for (std::size_t q = 0; q < env.query_count(); ++q) {
            RolloutGroup group;
            group.query_id = env.query_id(q);
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(iter), q));
            for (int g = 0; g < params.cfg.group_size; ++g) {
                Rollout rollout = env.run_episode(q, policy, rng);
                if (want_ref) {
                    std::vector<double> ref_lps;
                    ref_lps.reserve(rollout.decisions.size());
                    for (const auto& d : rollout.decisions)
                        ref_lps.push_back(policy_logp(reference, d.action_features, d.chosen));
                    rollout.logp_ref = std::move(ref_lps);
                }
                rollout.scores = compute_scores(rollout.trajectory, params.stability);
                group.rollouts.push_back(std::move(rollout));
            }
            groups.push_back(std::move(group));
        }

        // --- abnormality thresholds freeze once the calibration window fills
        if (!calibration) {
            for (const auto& group : groups) {
                for (const auto& r : group.rollouts) {
                    if (calib_buffer.size() < static_cast<std::size_t>(params.calibration_window))
                        calib_buffer.push_back(r.scores);
                }
            }
            if (calib_buffer.size() >= static_cast<std::size_t>(params.calibration_window))
                calibration = calibrate_abnormality(calib_buffer, params.tail_mass);
        }
        if (calibration) {
            for (auto& group : groups)
                for (auto& r : group.rollouts) r.flags = flag_abnormal(r.scores, *calibration);
        }

        // --- sampling-policy statistics for this iteration
        IterationStats stats;
        stats.iteration = iter;
        double n = 0.0;
        for (const auto& group : groups) {
            for (const auto& r : group.rollouts) {
                stats.mean_task_reward += r.task_reward;
                stats.success_rate += r.task_reward == 1.0 ? 1.0 : 0.0;
                stats.mean_r_acf += r.scores.r_acf;
                stats.mean_r_pe += r.scores.r_pe;
                n += 1.0;
            }
        }
        stats.mean_task_reward /= n;
        stats.success_rate /= n;
        stats.mean_r_acf /= n;
        stats.mean_r_pe /= n;

        // --- ascent steps
        const double Q = static_cast<double>(groups.size());
        Vector grad = Vector::Zero(policy.theta.size());
        for (int u = 0; u < params.updates_per_iteration; ++u) {
            grad.setZero();
            for (const auto& group : groups) grad += surrogate_gradient(group, policy, params.cfg);
            grad /= Q;
            policy.theta += params.learning_rate * grad;
            if (!policy.theta.allFinite())
                raise(Errc::divergence,
                      "non-finite parameters at iteration " + std::to_string(iter));
        }
        stats.grad_norm = grad.norm();

        // --- post-update objective and KL, for the log
        double surrogate = 0.0, kl = 0.0;
        for (const auto& group : groups) {
            const GroupLogp lps = group_logp(group, policy);
            surrogate += clipped_surrogate(group, lps, params.cfg);
            kl += group_kl(group, lps);
        }
        stats.surrogate = surrogate / Q;
        stats.kl = kl / Q;

        result.log.rows.push_back(stats);
    }

    result.policy = std::move(policy);
    result.calibration = calibration;
    return result;
}

}  // namespace starpo
