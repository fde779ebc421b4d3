#pragma once

#include "starpo/rng.hpp"
#include "starpo/trajectory.hpp"

namespace starpo {

// Linear-softmax policy over per-action feature rows:
//   p(a) = softmax_a(theta . phi(s,a) / temperature).
struct ToyPolicy {
    Vector theta;
    double temperature = 1.0;

    void validate() const;
};

// Numerically stable log-softmax of a score vector.
Vector log_softmax(const Vector& logits);

// Per-action scores theta . phi / temperature; action_features has one row per
// legal action. Raises DeadEnd on zero rows, DimMismatch on a column/theta
// mismatch.
Vector policy_logits(const ToyPolicy& policy, const Matrix& action_features);

// Log-probability of one action index under the policy.
double policy_logp(const ToyPolicy& policy, const Matrix& action_features, int action);

struct PolicySample {
    int action = 0;
    double logp = 0.0;
};

// Samples an action from the softmax distribution using one uniform draw.
PolicySample policy_sample(const ToyPolicy& policy, const Matrix& action_features, Rng& rng);

// d logp(action) / d theta = (phi_action - sum_b p_b phi_b) / temperature.
Vector policy_grad_logp(const ToyPolicy& policy, const Matrix& action_features, int action);

}  // namespace starpo
