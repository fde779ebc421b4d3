#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "starpo/game24.hpp"
#include "starpo/policy.hpp"
#include "starpo/policy_opt.hpp"
#include "starpo/rng.hpp"

namespace starpo {

// Deterministic map from game states to step embeddings: a canonical feature
// vector (sorted numbers, count, depth, last result, statement flag) through a
// fixed seeded random projection.
class StateEmbedder {
public:
    StateEmbedder(int dim, std::uint64_t seed);

    int dim() const { return static_cast<int>(projection_.rows()); }
    Vector embed_state(const Game24State& state) const;
    // Embedding of the spoken form "lhs op rhs = result" at a given depth.
    Vector embed_statement(const AppliedOp& applied, int depth) const;

private:
    Vector project(const Vector& raw) const;

    Matrix projection_;
};

// Rollout source for the trainer. Implementations must be deterministic given
// the RNG stream and must not share mutable state across episodes.
class Environment {
public:
    virtual ~Environment() = default;

    virtual Eigen::Index feature_dim() const = 0;
    virtual std::size_t query_count() const = 0;
    virtual std::string query_id(std::size_t query) const = 0;
    virtual Rollout run_episode(std::size_t query, const ToyPolicy& policy, Rng& rng) const = 0;
};

struct Game24EnvConfig {
    std::vector<std::array<int, 4>> puzzles;
    int embed_dim = 8;
    std::uint64_t embed_seed = 2024;
    bool eight_step = false;  // interleave statement embeddings to 8 steps
};

// A small pool of solvable puzzles with several distinct solution routes.
std::vector<std::array<int, 4>> default_puzzle_pool();

class Game24Env : public Environment {
public:
    explicit Game24Env(Game24EnvConfig cfg);

    Eigen::Index feature_dim() const override;
    std::size_t query_count() const override { return cfg_.puzzles.size(); }
    std::string query_id(std::size_t query) const override;
    Rollout run_episode(std::size_t query, const ToyPolicy& policy, Rng& rng) const override;

    // Per-action feature rows for a state; exposed for gradient tests.
    Matrix action_features(const Game24State& state,
                           const std::vector<Game24Action>& actions) const;
    const Game24EnvConfig& config() const { return cfg_; }
    const StateEmbedder& embedder() const { return embedder_; }

private:
    Game24EnvConfig cfg_;
    StateEmbedder embedder_;
};

// Rule-based annotation for policy rollouts: an exactly repeated state multiset
// marks a repetition loop; otherwise no error label. (Game-of-24 states shrink
// every move, so rollouts from Game24Env always come back unlabeled.)
ErrorLabel detect_rollout_label(const std::vector<Game24State>& visited);

}  // namespace starpo
