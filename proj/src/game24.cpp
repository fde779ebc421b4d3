#include "starpo/game24.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

namespace starpo {

namespace {

std::int64_t checked_narrow(__int128 v, const char* what) {
    if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
        raise(Errc::invalid_params, std::string("rational overflow in ") + what);
    return static_cast<std::int64_t>(v);
}

}  // namespace

Rational::Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
    if (den == 0) raise(Errc::invalid_params, "rational with zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
}

std::string Rational::to_string() const {
    if (den == 1) return std::to_string(num);
    return std::to_string(num) + "/" + std::to_string(den);
}

Rational operator+(const Rational& a, const Rational& b) {
    const __int128 n = static_cast<__int128>(a.num) * b.den + static_cast<__int128>(b.num) * a.den;
    const __int128 d = static_cast<__int128>(a.den) * b.den;
    return {checked_narrow(n, "+"), checked_narrow(d, "+")};
}

Rational operator-(const Rational& a, const Rational& b) {
    const __int128 n = static_cast<__int128>(a.num) * b.den - static_cast<__int128>(b.num) * a.den;
    const __int128 d = static_cast<__int128>(a.den) * b.den;
    return {checked_narrow(n, "-"), checked_narrow(d, "-")};
}

Rational operator*(const Rational& a, const Rational& b) {
    const __int128 n = static_cast<__int128>(a.num) * b.num;
    const __int128 d = static_cast<__int128>(a.den) * b.den;
    return {checked_narrow(n, "*"), checked_narrow(d, "*")};
}

Rational operator/(const Rational& a, const Rational& b) {
    if (b.num == 0) raise(Errc::illegal_action, "division by zero");
    const __int128 n = static_cast<__int128>(a.num) * b.den;
    const __int128 d = static_cast<__int128>(a.den) * b.num;
    return {checked_narrow(n, "/"), checked_narrow(d, "/")};
}

bool operator<(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
}

char op_char(Op op) {
    switch (op) {
        case Op::Add: return '+';
        case Op::Sub: return '-';
        case Op::Mul: return '*';
        case Op::Div: return '/';
    }
    return '?';
}

namespace {

Rational apply_op(const Rational& a, const Rational& b, Op op) {
    switch (op) {
        case Op::Add: return a + b;
        case Op::Sub: return a - b;
        case Op::Mul: return a * b;
        case Op::Div: return a / b;
    }
    raise(Errc::illegal_action, "unknown operator");
}

}  // namespace

Game24State game24_reset(const std::array<int, 4>& puzzle) {
    Game24State state;
    for (int v : puzzle) {
        if (v < 1 || v > 13)
            raise(Errc::invalid_puzzle, "puzzle value " + std::to_string(v) + " outside [1,13]");
        state.numbers.emplace_back(v);
    }
    return state;
}

Game24State game24_step(const Game24State& state, const Game24Action& action) {
    const int n = static_cast<int>(state.numbers.size());
    if (n < 2) raise(Errc::illegal_action, "no combinable pair left");
    if (action.i < 0 || action.i >= n || action.j < 0 || action.j >= n || action.i == action.j)
        raise(Errc::illegal_action, "operand indices out of range or equal");
    const Rational& a = state.numbers[static_cast<std::size_t>(action.i)];
    const Rational& b = state.numbers[static_cast<std::size_t>(action.j)];
    if (action.op == Op::Div && b.is_zero()) raise(Errc::illegal_action, "division by zero");

    Game24State next;
    next.history = state.history;
    next.history.push_back({a, b, action.op, apply_op(a, b, action.op)});
    for (int k = 0; k < n; ++k)
        if (k != action.i && k != action.j)
            next.numbers.push_back(state.numbers[static_cast<std::size_t>(k)]);
    next.numbers.push_back(next.history.back().result);
    return next;
}

double game24_reward(const Game24State& state) {
    if (!state.terminal())
        raise(Errc::not_terminal,
              "reward of a state with " + std::to_string(state.numbers.size()) + " numbers");
    return state.numbers.front() == kTarget ? 1.0 : 0.0;
}

std::vector<Game24Action> legal_actions(const Game24State& state) {
    const int n = static_cast<int>(state.numbers.size());
    std::vector<Game24Action> actions;
    if (n < 2) return actions;

    // signature (lhs value, rhs value, op) — one action per distinct signature
    std::set<std::tuple<std::int64_t, std::int64_t, std::int64_t, std::int64_t, int>> seen;
    auto try_add = [&](int i, int j, Op op) {
        const Rational& a = state.numbers[static_cast<std::size_t>(i)];
        const Rational& b = state.numbers[static_cast<std::size_t>(j)];
        if (op == Op::Div && b.is_zero()) return;
        if (!seen.insert({a.num, a.den, b.num, b.den, static_cast<int>(op)}).second) return;
        actions.push_back({i, j, op});
    };
    for (Op op : {Op::Add, Op::Sub, Op::Mul, Op::Div}) {
        const bool commutative = op == Op::Add || op == Op::Mul;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                // commutative ops: keep only the value-sorted orientation
                if (commutative && state.numbers[static_cast<std::size_t>(j)] <
                                       state.numbers[static_cast<std::size_t>(i)])
                    continue;
                try_add(i, j, op);
            }
        }
    }
    return actions;
}

ExprPtr make_leaf(const Rational& v) {
    auto e = std::make_shared<Expr>();
    e->value = v;
    return e;
}

ExprPtr make_node(Op op, ExprPtr lhs, ExprPtr rhs) {
    auto e = std::make_shared<Expr>();
    e->value = apply_op(lhs->value, rhs->value, op);
    e->op = op;
    e->lhs = std::move(lhs);
    e->rhs = std::move(rhs);
    return e;
}

std::string expr_to_string(const Expr& e) {
    if (!e.op) return e.value.to_string();
    return "(" + expr_to_string(*e.lhs) + " " + op_char(*e.op) + " " + expr_to_string(*e.rhs) + ")";
}

namespace {

// Recursive combine: replace any pair by any op result until one value remains.
void solve_rec(std::vector<ExprPtr>& pool, SolveResult& out, std::set<std::string>& seen) {
    if (pool.size() == 1) {
        if (pool[0]->value == kTarget) {
            std::string form = expr_to_string(*pool[0]);
            if (seen.insert(std::move(form)).second) out.solutions.push_back(pool[0]);
        }
        return;
    }
    const std::size_t n = pool.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            ExprPtr a = pool[i];
            ExprPtr b = pool[j];
            std::vector<ExprPtr> rest;
            for (std::size_t k = 0; k < n; ++k)
                if (k != i && k != j) rest.push_back(pool[k]);
            for (Op op : {Op::Add, Op::Sub, Op::Mul, Op::Div}) {
                // commutative ops need only one orientation per unordered pair
                if ((op == Op::Add || op == Op::Mul) && i > j) continue;
                if (op == Op::Div && b->value.is_zero()) continue;
                rest.push_back(make_node(op, a, b));
                solve_rec(rest, out, seen);
                rest.pop_back();
            }
        }
    }
}

}  // namespace

SolveResult game24_solve(const std::array<int, 4>& puzzle) {
    std::vector<ExprPtr> pool;
    for (const Rational& v : game24_reset(puzzle).numbers) pool.push_back(make_leaf(v));
    SolveResult out;
    std::set<std::string> seen;
    solve_rec(pool, out, seen);
    out.solvable = !out.solutions.empty();
    return out;
}

namespace {

// Existence-only search over plain values with early exit.
bool solvable_rec(std::vector<Rational>& vals) {
    if (vals.size() == 1) return vals[0] == kTarget;
    const std::size_t n = vals.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const Rational a = vals[i];
            const Rational b = vals[j];
            std::vector<Rational> rest;
            rest.reserve(n - 1);
            for (std::size_t k = 0; k < n; ++k)
                if (k != i && k != j) rest.push_back(vals[k]);
            for (Op op : {Op::Add, Op::Sub, Op::Mul, Op::Div}) {
                if ((op == Op::Add || op == Op::Mul) && i > j) continue;
                if (op == Op::Div && b.is_zero()) continue;
                rest.push_back(apply_op(a, b, op));
                const bool hit = solvable_rec(rest);
                rest.pop_back();
                if (hit) return true;
            }
        }
    }
    return false;
}

}  // namespace

bool numbers_solvable(const std::vector<Rational>& numbers) {
    if (numbers.empty()) return false;
    std::vector<Rational> vals = numbers;
    std::sort(vals.begin(), vals.end());
    std::string key;
    for (const Rational& v : vals) {
        key += v.to_string();
        key += ' ';
    }
    static std::unordered_map<std::string, bool> cache;
    static std::mutex cache_mutex;
    {
        std::lock_guard<std::mutex> lock(cache_mutex);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    const bool result = solvable_rec(vals);
    std::lock_guard<std::mutex> lock(cache_mutex);
    cache.emplace(std::move(key), result);
    return result;
}

std::vector<std::array<int, 4>> load_puzzles(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::io_error, "cannot open: " + path);

    std::vector<std::array<int, 4>> puzzles;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::array<int, 4> p{};
        if (ss >> std::ws; ss.peek() == std::char_traits<char>::eof()) continue;  // blank line
        for (int& v : p) {
            if (!(ss >> v))
                raise(Errc::parse_error,
                      path + ":" + std::to_string(lineno) + ": expected four integers");
        }
        std::string extra;
        if (ss >> extra)
            raise(Errc::parse_error,
                  path + ":" + std::to_string(lineno) + ": trailing content '" + extra + "'");
        for (int v : p)
            if (v < 1 || v > 13)
                raise(Errc::invalid_puzzle,
                      path + ":" + std::to_string(lineno) + ": value " + std::to_string(v) +
                          " outside [1,13]");
        puzzles.push_back(p);
    }
    return puzzles;
}

std::string puzzle_to_string(const std::array<int, 4>& puzzle) {
    std::string out;
    for (int v : puzzle) {
        if (!out.empty()) out += ' ';
        out += std::to_string(v);
    }
    return out;
}

}  // namespace starpo
