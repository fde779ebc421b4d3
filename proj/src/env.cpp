#include "starpo/env.hpp"

#include <algorithm>
#include <cmath>

namespace starpo {

namespace {

constexpr int kRawFeatureDim = 8;  // 4 number slots + count + depth + last result + statement flag

Vector state_raw_features(const Game24State& state) {
    Vector raw = Vector::Zero(kRawFeatureDim);
    std::vector<double> values;
    values.reserve(state.numbers.size());
    for (const Rational& r : state.numbers) values.push_back(r.to_double());
    std::sort(values.begin(), values.end());
    for (std::size_t k = 0; k < values.size() && k < 4; ++k) raw(static_cast<Eigen::Index>(k)) = values[k];
    raw(4) = static_cast<double>(state.numbers.size());
    raw(5) = static_cast<double>(state.depth());
    raw(6) = state.history.empty() ? 0.0 : state.history.back().result.to_double();
    raw(7) = 0.0;  // statement flag
    return raw;
}

}  // namespace

StateEmbedder::StateEmbedder(int dim, std::uint64_t seed) {
    if (dim < 2) raise(Errc::invalid_params, "embedding dimension must be at least 2");
    Rng rng(derive_seed(seed, 0x7a6b, 0));
    projection_.resize(dim, kRawFeatureDim);
    const double scale = 1.0 / std::sqrt(static_cast<double>(kRawFeatureDim));
    for (Eigen::Index i = 0; i < projection_.rows(); ++i)
        for (Eigen::Index j = 0; j < projection_.cols(); ++j)
            projection_(i, j) = scale * rng.normal();
}

Vector StateEmbedder::project(const Vector& raw) const { return projection_ * raw; }

Vector StateEmbedder::embed_state(const Game24State& state) const {
    return project(state_raw_features(state));
}

Vector StateEmbedder::embed_statement(const AppliedOp& applied, int depth) const {
    Vector raw = Vector::Zero(kRawFeatureDim);
    std::vector<double> values = {applied.lhs.to_double(), applied.rhs.to_double(),
                                  applied.result.to_double()};
    std::sort(values.begin(), values.end());
    for (std::size_t k = 0; k < values.size(); ++k) raw(static_cast<Eigen::Index>(k)) = values[k];
    raw(4) = 3.0;
    raw(5) = static_cast<double>(depth) - 0.5;  // spoken between two states
    raw(6) = applied.result.to_double();
    raw(7) = 1.0;
    return project(raw);
}

std::vector<std::array<int, 4>> default_puzzle_pool() {
    return {
        {1, 1, 2, 12}, {1, 2, 3, 4}, {2, 4, 6, 8}, {4, 6, 8, 8},
        {2, 3, 4, 6},  {2, 3, 6, 9}, {2, 4, 4, 8}, {2, 2, 6, 12},
    };
}

Game24Env::Game24Env(Game24EnvConfig cfg)
    : cfg_(std::move(cfg)), embedder_(cfg_.embed_dim, cfg_.embed_seed) {
    if (cfg_.puzzles.empty()) raise(Errc::invalid_params, "puzzle pool is empty");
    for (const auto& p : cfg_.puzzles) game24_reset(p);  // range-check every puzzle
}

Eigen::Index Game24Env::feature_dim() const { return 9; }

std::string Game24Env::query_id(std::size_t query) const {
    if (query >= cfg_.puzzles.size()) raise(Errc::invalid_params, "query index out of range");
    return puzzle_to_string(cfg_.puzzles[query]);
}

Matrix Game24Env::action_features(const Game24State& state,
                                  const std::vector<Game24Action>& actions) const {
    Matrix feats(static_cast<Eigen::Index>(actions.size()), feature_dim());
    for (std::size_t a = 0; a < actions.size(); ++a) {
        const Game24State next = game24_step(state, actions[a]);
        const Rational result = next.history.back().result;
        const double solvable = numbers_solvable(next.numbers) ? 1.0 : 0.0;
        Eigen::Index c = 0;
        feats(static_cast<Eigen::Index>(a), c++) = 1.0;  // bias
        feats(static_cast<Eigen::Index>(a), c++) = solvable;
        // Operator identity gated by solvability: preferences learned here can
        // reorder equally viable continuations without eating into the
        // solvable-vs-dead margin.
        for (Op op : {Op::Add, Op::Sub, Op::Mul, Op::Div})
            feats(static_cast<Eigen::Index>(a), c++) = actions[a].op == op ? solvable : 0.0;
        feats(static_cast<Eigen::Index>(a), c++) = result.is_integer() ? solvable : 0.0;
        feats(static_cast<Eigen::Index>(a), c++) = result == kTarget ? 1.0 : 0.0;
        feats(static_cast<Eigen::Index>(a), c++) =
            next.terminal() && result == kTarget ? 1.0 : 0.0;
    }
    return feats;
}

Rollout Game24Env::run_episode(std::size_t query, const ToyPolicy& policy, Rng& rng) const {
    if (query >= cfg_.puzzles.size()) raise(Errc::invalid_params, "query index out of range");

    Game24State state = game24_reset(cfg_.puzzles[query]);
    std::vector<Game24State> visited = {state};

    Rollout rollout;
    while (!state.terminal()) {
        const std::vector<Game24Action> legal = legal_actions(state);
        if (legal.empty()) raise(Errc::dead_end, "no legal action available");
        Matrix feats = action_features(state, legal);
        const PolicySample pick = policy_sample(policy, feats, rng);
        rollout.decisions.push_back({std::move(feats), pick.action});
        rollout.logp_old.push_back(pick.logp);
        state = game24_step(state, legal[static_cast<std::size_t>(pick.action)]);
        visited.push_back(state);
    }
    rollout.task_reward = game24_reward(state);

    // Embedding trajectory: the visited states, optionally interleaved with
    // per-move statement rows (and a closing answer row) to reach 8 steps.
    Trajectory traj;
    traj.id = "g24-" + puzzle_to_string(cfg_.puzzles[query]);
    std::vector<Vector> rows;
    std::vector<std::string> texts;
    auto state_text = [](const Game24State& s) {
        std::string out;
        for (const Rational& r : s.numbers) {
            if (!out.empty()) out += ' ';
            out += r.to_string();
        }
        return out;
    };
    rows.push_back(embedder_.embed_state(visited[0]));
    texts.push_back(state_text(visited[0]));
    for (std::size_t k = 1; k < visited.size(); ++k) {
        const AppliedOp& applied = visited[k].history.back();
        if (cfg_.eight_step) {
            rows.push_back(embedder_.embed_statement(applied, static_cast<int>(k)));
            texts.push_back(applied.lhs.to_string() + " " + op_char(applied.op) + " " +
                            applied.rhs.to_string() + " = " + applied.result.to_string());
        }
        rows.push_back(embedder_.embed_state(visited[k]));
        texts.push_back(state_text(visited[k]));
    }
    if (cfg_.eight_step) {
        const Rational final_value = state.numbers.front();
        AppliedOp answer{final_value, final_value, Op::Add, final_value};
        rows.push_back(embedder_.embed_statement(answer, static_cast<int>(visited.size())));
        texts.push_back("answer: " + final_value.to_string());
    }
    traj.steps.resize(static_cast<Eigen::Index>(rows.size()), embedder_.dim());
    for (std::size_t k = 0; k < rows.size(); ++k)
        traj.steps.row(static_cast<Eigen::Index>(k)) = rows[k].transpose();
    traj.step_texts = std::move(texts);
    traj.task_reward = rollout.task_reward;
    traj.label = detect_rollout_label(visited);
    traj.meta["puzzle"] = puzzle_to_string(cfg_.puzzles[query]);
    traj.validate();
    rollout.trajectory = std::move(traj);
    return rollout;
}

ErrorLabel detect_rollout_label(const std::vector<Game24State>& visited) {
    std::vector<std::vector<Rational>> seen;
    for (const auto& state : visited) {
        std::vector<Rational> key = state.numbers;
        std::sort(key.begin(), key.end());
        for (const auto& prior : seen)
            if (prior == key) return ErrorLabel::RepetitionLoop;
        seen.push_back(std::move(key));
    }
    return ErrorLabel::None;
}

}  // namespace starpo
