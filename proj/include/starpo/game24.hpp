#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "starpo/error.hpp"

namespace starpo {

// Exact rational, always in lowest terms with positive denominator, so that
// structural equality is value equality and 24-checks are unambiguous.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    constexpr Rational() = default;
    constexpr Rational(std::int64_t n) : num(n) {}  // NOLINT: implicit integer promotion wanted
    Rational(std::int64_t n, std::int64_t d);

    bool operator==(const Rational&) const = default;
    bool is_integer() const { return den == 1; }
    bool is_zero() const { return num == 0; }
    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
    std::string to_string() const;
};

Rational operator+(const Rational& a, const Rational& b);
Rational operator-(const Rational& a, const Rational& b);
Rational operator*(const Rational& a, const Rational& b);
// Raises IllegalAction on division by zero.
Rational operator/(const Rational& a, const Rational& b);
bool operator<(const Rational& a, const Rational& b);

enum class Op { Add, Sub, Mul, Div };
char op_char(Op op);

struct Game24Action {
    int i = 0;  // left operand index into the current multiset
    int j = 1;  // right operand index, distinct from i
    Op op = Op::Add;
};

struct AppliedOp {
    Rational lhs, rhs;
    Op op = Op::Add;
    Rational result;
};

struct Game24State {
    std::vector<Rational> numbers;
    std::vector<AppliedOp> history;

    bool terminal() const { return numbers.size() == 1; }
    int depth() const { return static_cast<int>(history.size()); }
};

inline constexpr Rational kTarget{24};

// Fresh state from four integers in [1,13]. Raises InvalidPuzzle out of range.
Game24State game24_reset(const std::array<int, 4>& puzzle);

// Applies one combine action: removes the two operands, inserts the exact
// result, appends to history. Raises IllegalAction on bad indices, i == j, or
// division by zero; NotTerminal is never needed here but < 2 numbers raises
// IllegalAction too.
Game24State game24_step(const Game24State& state, const Game24Action& action);

// 1 iff the single remaining rational equals 24 exactly, else 0. Raises
// NotTerminal unless exactly one number remains.
double game24_reward(const Game24State& state);

// All distinct legal combine actions, deduplicated by (operand values, op)
// so value-equivalent index choices appear once, in a fixed canonical order.
// Commutative ops are emitted with operand values sorted.
std::vector<Game24Action> legal_actions(const Game24State& state);

// Expression tree over the puzzle numbers; leaves carry no operator.
struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;
struct Expr {
    Rational value;  // evaluated value of this subtree
    std::optional<Op> op;
    ExprPtr lhs, rhs;
};
ExprPtr make_leaf(const Rational& v);
ExprPtr make_node(Op op, ExprPtr lhs, ExprPtr rhs);  // evaluates eagerly
std::string expr_to_string(const Expr& e);

struct SolveResult {
    bool solvable = false;
    std::vector<ExprPtr> solutions;  // deduplicated by printed form
};

// Brute force over all operand pairings, operator choices, and association
// shapes via recursive combination, in exact arithmetic.
SolveResult game24_solve(const std::array<int, 4>& puzzle);

// Solvability of an intermediate multiset of 1..4 rationals (same search).
bool numbers_solvable(const std::vector<Rational>& numbers);

// One puzzle per line, four space-separated integers. Raises ParseError with
// file/line context, InvalidPuzzle on out-of-range values.
std::vector<std::array<int, 4>> load_puzzles(const std::string& path);
std::string puzzle_to_string(const std::array<int, 4>& puzzle);

}  // namespace starpo
