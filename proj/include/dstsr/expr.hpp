#pragma once

#include <array>
#include <bitset>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dstsr {

/// Model input variables. Units: Dst nT, Ey mV/m, Pdyn nPa, PB nPa.
enum class Variable : std::uint8_t { Dst, Ey, Pdyn, PB };
inline constexpr std::size_t kVariableCount = 4;
inline constexpr std::array<Variable, kVariableCount> kAllVariables{Variable::Dst, Variable::Ey,
                                                                    Variable::Pdyn, Variable::PB};

enum class UnaryOp : std::uint8_t { Exp, Log, Sqrt, Square, Sign, Neg };
inline constexpr std::size_t kUnaryOpCount = 6;

enum class BinaryOp : std::uint8_t { Add, Sub, Mul, Div, Max, Min };
inline constexpr std::size_t kBinaryOpCount = 6;

enum class NodeKind : std::uint8_t { Constant, Variable, Unary, Binary };

std::string_view name(Variable v);
std::string_view name(UnaryOp op);
std::string_view name(BinaryOp op);

using VariableSet = std::bitset<kVariableCount>;

VariableSet all_variables();

/// One node of a postfix-encoded expression. `code` holds the Variable,
/// UnaryOp or BinaryOp enumerator for the respective kinds.
struct Node {
    NodeKind kind = NodeKind::Constant;
    std::uint8_t code = 0;
    std::uint32_t length = 1; // subtree size including this node
    double value = 0.0;

    [[nodiscard]] int arity() const noexcept
    {
        return kind == NodeKind::Unary ? 1 : kind == NodeKind::Binary ? 2 : 0;
    }
    [[nodiscard]] bool is_leaf() const noexcept { return arity() == 0; }
    [[nodiscard]] Variable variable() const noexcept { return static_cast<Variable>(code); }
    [[nodiscard]] UnaryOp unary_op() const noexcept { return static_cast<UnaryOp>(code); }
    [[nodiscard]] BinaryOp binary_op() const noexcept { return static_cast<BinaryOp>(code); }

    friend bool operator==(const Node&, const Node&) = default;
};

/// Immutable expression tree, stored in postfix order. The subtree rooted at
/// node i occupies [i + 1 - nodes[i].length, i]. Constants are always finite.
class Expr {
public:
    Expr() : Expr(constant(0.0)) {}

    static Expr constant(double value);
    static Expr variable(Variable v);
    static Expr unary(UnaryOp op, const Expr& child);
    static Expr binary(BinaryOp op, const Expr& left, const Expr& right);

    /// Builds from a postfix node list; lengths are recomputed. Throws
    /// std::invalid_argument if the sequence is not a single well-formed tree.
    static Expr from_postfix(std::vector<Node> nodes);

    [[nodiscard]] std::span<const Node> nodes() const noexcept { return nodes_; }
    [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
    [[nodiscard]] const Node& root() const noexcept { return nodes_.back(); }
    [[nodiscard]] std::size_t depth() const;
    [[nodiscard]] VariableSet variables() const;

    /// Child `which` (0 = left/only, 1 = right) of the root.
    [[nodiscard]] Expr child(std::size_t which) const;

    /// First postfix index of the subtree rooted at `index`.
    [[nodiscard]] std::size_t subtree_begin(std::size_t index) const
    {
        return index + 1 - nodes_[index].length;
    }
    [[nodiscard]] Expr subtree(std::size_t index) const;
    [[nodiscard]] Expr replace_subtree(std::size_t index, const Expr& replacement) const;
    /// Same shape with node `index` swapped for `node` (must keep the arity).
    [[nodiscard]] Expr replace_node(std::size_t index, const Node& node) const;

    friend bool operator==(const Expr&, const Expr&) = default;

private:
    explicit Expr(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}
    std::vector<Node> nodes_;
};

class UnboundVariable : public std::runtime_error {
public:
    explicit UnboundVariable(Variable v);
    [[nodiscard]] Variable variable() const noexcept { return var_; }

private:
    Variable var_;
};

class Bindings {
public:
    Bindings() { values_.fill(0.0); }
    Bindings(std::initializer_list<std::pair<Variable, double>> init);

    Bindings& set(Variable v, double value);
    [[nodiscard]] bool bound(Variable v) const { return bound_.test(static_cast<std::size_t>(v)); }
    [[nodiscard]] double get(Variable v) const;

private:
    std::array<double, kVariableCount> values_{};
    VariableSet bound_;
};

/// Column view over a table of feature values; an empty span means the
/// column is absent.
struct FeatureTable {
    std::size_t rows = 0;
    std::array<std::span<const double>, kVariableCount> columns{};

    [[nodiscard]] bool has(Variable v) const
    {
        return columns[static_cast<std::size_t>(v)].size() == rows;
    }
};

double apply(UnaryOp op, double x) noexcept;
double apply(BinaryOp op, double a, double b) noexcept;

/// Protected evaluation: domain errors yield NaN, which propagates through
/// every operator. Throws UnboundVariable if a used variable has no value.
double evaluate(const Expr& expr, const Bindings& bindings);

/// Row-wise evaluation over a column table. Throws std::invalid_argument when a
/// column the expression needs is missing.
std::vector<double> evaluate_batch(const Expr& expr, const FeatureTable& table);

struct ComplexityWeights {
    int constant = 1;
    int variable = 1;
    std::array<int, kUnaryOpCount> unary{1, 1, 1, 1, 1, 1};
    std::array<int, kBinaryOpCount> binary{1, 1, 1, 1, 1, 1};
};

int complexity(const Expr& expr, const ComplexityWeights& weights = {});

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t position, const std::string& message);
    [[nodiscard]] std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

Expr parse(std::string_view text);

/// Canonical infix text; constants use at most 6 significant digits.
std::string print(const Expr& expr);

Expr fold_constants(const Expr& expr);

/// Rounds to `digits` significant digits through the printer's decimal form,
/// so round_significant(x) re-parses bit-identically from print().
double round_significant(double value, int digits = 6);

/// All constants rounded to the printer's precision.
Expr quantize_constants(const Expr& expr);

/// Dedupe key: print(fold_constants(expr)).
std::string canonical_string(const Expr& expr);

struct OperatorSet {
    std::vector<UnaryOp> unary{UnaryOp::Exp, UnaryOp::Log, UnaryOp::Sqrt, UnaryOp::Square,
                               UnaryOp::Sign};
    std::vector<BinaryOp> binary{BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul,
                                 BinaryOp::Div, BinaryOp::Max, BinaryOp::Min};
};

struct RandomTreeOptions {
    std::vector<Variable> features{kAllVariables.begin(), kAllVariables.end()};
    OperatorSet operators{};
    double constant_min = -2.0;
    double constant_max = 2.0;
    double leaf_probability = 0.3; // chance of stopping early below max depth
    double variable_probability = 0.6;
};

using Rng = std::mt19937_64;

/// Random leaf (variable or constant) drawn from `options`.
Expr random_leaf(Rng& rng, const RandomTreeOptions& options);

/// Grow-style random tree of depth <= max_depth. Constants are rounded to the
/// printer's precision so generated trees round-trip through text exactly.
Expr random_expr(Rng& rng, std::size_t max_depth, const RandomTreeOptions& options);

} // namespace dstsr
