#include "starpo/policy.hpp"

#include <cmath>

namespace starpo {

void ToyPolicy::validate() const {
    if (!theta.allFinite()) raise(Errc::invalid_params, "policy weights must be finite");
    if (!(temperature > 0.0)) raise(Errc::invalid_params, "temperature must be positive");
}

Vector log_softmax(const Vector& logits) {
    if (logits.size() == 0) raise(Errc::dead_end, "log_softmax of an empty score vector");
    const double peak = logits.maxCoeff();
    const double lse = peak + std::log((logits.array() - peak).exp().sum());
    return logits.array() - lse;
}

Vector policy_logits(const ToyPolicy& policy, const Matrix& action_features) {
    policy.validate();
    if (action_features.rows() == 0) raise(Errc::dead_end, "no legal action");
    if (action_features.cols() != policy.theta.size())
        raise(Errc::dim_mismatch,
              "feature dimension " + std::to_string(action_features.cols()) +
                  " does not match policy dimension " + std::to_string(policy.theta.size()));
    return action_features * policy.theta / policy.temperature;
}

double policy_logp(const ToyPolicy& policy, const Matrix& action_features, int action) {
    if (action < 0 || action >= action_features.rows())
        raise(Errc::illegal_action, "action index " + std::to_string(action) + " out of range");
    return log_softmax(policy_logits(policy, action_features))(action);
}

PolicySample policy_sample(const ToyPolicy& policy, const Matrix& action_features, Rng& rng) {
    const Vector logp = log_softmax(policy_logits(policy, action_features));
    const Vector probs = logp.array().exp();
    const double u = rng.uniform();
    double cum = 0.0;
    // walk the CDF; the final index absorbs any rounding shortfall
    int chosen = static_cast<int>(probs.size()) - 1;
    for (int a = 0; a < probs.size(); ++a) {
        cum += probs(a);
        if (u < cum) {
            chosen = a;
            break;
        }
    }
    return {chosen, logp(chosen)};
}

Vector policy_grad_logp(const ToyPolicy& policy, const Matrix& action_features, int action) {
    if (action < 0 || action >= action_features.rows())
        raise(Errc::illegal_action, "action index " + std::to_string(action) + " out of range");
    const Vector probs = log_softmax(policy_logits(policy, action_features)).array().exp();
    const Vector mean_feature = action_features.transpose() * probs;
    return (action_features.row(action).transpose() - mean_feature) / policy.temperature;
}

}  // namespace starpo
