#include "dstsr/expr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dstsr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void recompute_lengths(std::vector<Node>& nodes)
{
    std::vector<std::uint32_t> stack;
    stack.reserve(nodes.size());
    for (auto& node : nodes) {
        const int arity = node.arity();
        if (stack.size() < static_cast<std::size_t>(arity)) {
            throw std::invalid_argument("malformed postfix expression: operator lacks operands");
        }
        std::uint32_t length = 1;
        for (int i = 0; i < arity; ++i) {
            length += stack.back();
            stack.pop_back();
        }
        node.length = length;
        stack.push_back(length);
    }
    if (stack.size() != 1) {
        throw std::invalid_argument("malformed postfix expression: expected exactly one root");
    }
}

} // namespace

std::string_view name(Variable v)
{
    switch (v) {
    case Variable::Dst: return "Dst";
    case Variable::Ey: return "Ey";
    case Variable::Pdyn: return "Pdyn";
    case Variable::PB: return "PB";
    }
    return "?";
}

std::string_view name(UnaryOp op)
{
    switch (op) {
    case UnaryOp::Exp: return "exp";
    case UnaryOp::Log: return "log";
    case UnaryOp::Sqrt: return "sqrt";
    case UnaryOp::Square: return "square";
    case UnaryOp::Sign: return "sign";
    case UnaryOp::Neg: return "neg";
    }
    return "?";
}

std::string_view name(BinaryOp op)
{
    switch (op) {
    case BinaryOp::Add: return "add";
    case BinaryOp::Sub: return "sub";
    case BinaryOp::Mul: return "mul";
    case BinaryOp::Div: return "div";
    case BinaryOp::Max: return "max";
    case BinaryOp::Min: return "min";
    }
    return "?";
}

VariableSet all_variables() { return VariableSet{}.set(); }

Expr Expr::constant(double value)
{
    if (!std::isfinite(value)) {
        throw std::invalid_argument("expression constants must be finite");
    }
    return Expr({Node{NodeKind::Constant, 0, 1, value}});
}

Expr Expr::variable(Variable v)
{
    return Expr({Node{NodeKind::Variable, static_cast<std::uint8_t>(v), 1, 0.0}});
}

Expr Expr::unary(UnaryOp op, const Expr& child)
{
    std::vector<Node> nodes(child.nodes_);
    nodes.push_back(Node{NodeKind::Unary, static_cast<std::uint8_t>(op),
                         static_cast<std::uint32_t>(child.size() + 1), 0.0});
    return Expr(std::move(nodes));
}

Expr Expr::binary(BinaryOp op, const Expr& left, const Expr& right)
{
    std::vector<Node> nodes;
    nodes.reserve(left.size() + right.size() + 1);
    nodes.insert(nodes.end(), left.nodes_.begin(), left.nodes_.end());
    nodes.insert(nodes.end(), right.nodes_.begin(), right.nodes_.end());
    nodes.push_back(Node{NodeKind::Binary, static_cast<std::uint8_t>(op),
                         static_cast<std::uint32_t>(left.size() + right.size() + 1), 0.0});
    return Expr(std::move(nodes));
}

Expr Expr::from_postfix(std::vector<Node> nodes)
{
    if (nodes.empty()) {
        throw std::invalid_argument("empty expression");
    }
    for (const auto& n : nodes) {
        if (n.kind == NodeKind::Constant && !std::isfinite(n.value)) {
            throw std::invalid_argument("expression constants must be finite");
        }
        const auto limit = n.kind == NodeKind::Variable ? kVariableCount
                         : n.kind == NodeKind::Unary    ? kUnaryOpCount
                         : n.kind == NodeKind::Binary   ? kBinaryOpCount
                                                        : 1;
        if (n.code >= limit) {
            throw std::invalid_argument("invalid node code");
        }
    }
    recompute_lengths(nodes);
    return Expr(std::move(nodes));
}

std::size_t Expr::depth() const
{
    std::vector<std::size_t> stack;
    for (const auto& n : nodes_) {
        std::size_t d = 0;
        for (int i = 0; i < n.arity(); ++i) {
            d = std::max(d, stack.back());
            stack.pop_back();
        }
        stack.push_back(d + 1);
    }
    return stack.back();
}

VariableSet Expr::variables() const
{
    VariableSet set;
    for (const auto& n : nodes_) {
        if (n.kind == NodeKind::Variable) {
            set.set(n.code);
        }
    }
    return set;
}

Expr Expr::child(std::size_t which) const
{
    const auto& r = root();
    if (static_cast<int>(which) >= r.arity()) {
        throw std::out_of_range("expression root has no such child");
    }
    const std::size_t last = size() - 1;
    if (r.arity() == 1) {
        return subtree(last - 1);
    }
    const std::size_t right = last - 1;
    if (which == 1) {
        return subtree(right);
    }
    return subtree(right - nodes_[right].length);
}

Expr Expr::subtree(std::size_t index) const
{
    const auto begin = subtree_begin(index);
    return Expr(std::vector<Node>(nodes_.begin() + static_cast<std::ptrdiff_t>(begin),
                                  nodes_.begin() + static_cast<std::ptrdiff_t>(index) + 1));
}

Expr Expr::replace_subtree(std::size_t index, const Expr& replacement) const
{
    const auto begin = subtree_begin(index);
    std::vector<Node> nodes;
    nodes.reserve(size() - nodes_[index].length + replacement.size());
    nodes.insert(nodes.end(), nodes_.begin(), nodes_.begin() + static_cast<std::ptrdiff_t>(begin));
    nodes.insert(nodes.end(), replacement.nodes_.begin(), replacement.nodes_.end());
    nodes.insert(nodes.end(), nodes_.begin() + static_cast<std::ptrdiff_t>(index) + 1, nodes_.end());
    recompute_lengths(nodes);
    return Expr(std::move(nodes));
}

Expr Expr::replace_node(std::size_t index, const Node& node) const
{
    if (node.arity() != nodes_[index].arity()) {
        throw std::invalid_argument("replace_node must preserve arity");
    }
    if (node.kind == NodeKind::Constant && !std::isfinite(node.value)) {
        throw std::invalid_argument("expression constants must be finite");
    }
    std::vector<Node> nodes(nodes_);
    nodes[index] = node;
    nodes[index].length = nodes_[index].length;
    return Expr(std::move(nodes));
}

UnboundVariable::UnboundVariable(Variable v)
    : std::runtime_error("unbound variable: " + std::string(name(v)))
    , var_(v)
{
}

Bindings::Bindings(std::initializer_list<std::pair<Variable, double>> init)
{
    values_.fill(0.0);
    for (const auto& [v, x] : init) {
        set(v, x);
    }
}

Bindings& Bindings::set(Variable v, double value)
{
    values_[static_cast<std::size_t>(v)] = value;
    bound_.set(static_cast<std::size_t>(v));
    return *this;
}

double Bindings::get(Variable v) const
{
    if (!bound(v)) {
        throw UnboundVariable(v);
    }
    return values_[static_cast<std::size_t>(v)];
}

double apply(UnaryOp op, double x) noexcept
{
    if (std::isnan(x)) {
        return kNaN;
    }
    switch (op) {
    case UnaryOp::Exp: return std::exp(x);
    case UnaryOp::Log: return x > 0.0 ? std::log(x) : kNaN;
    case UnaryOp::Sqrt: return x >= 0.0 ? std::sqrt(x) : kNaN;
    case UnaryOp::Square: return x * x;
    case UnaryOp::Sign: return x > 0.0 ? 1.0 : x < 0.0 ? -1.0 : 0.0;
    case UnaryOp::Neg: return -x;
    }
    return kNaN;
}

double apply(BinaryOp op, double a, double b) noexcept
{
    if (std::isnan(a) || std::isnan(b)) {
        return kNaN;
    }
    switch (op) {
    case BinaryOp::Add: return a + b;
    case BinaryOp::Sub: return a - b;
    case BinaryOp::Mul: return a * b;
    case BinaryOp::Div: return b != 0.0 ? a / b : kNaN;
    case BinaryOp::Max: return a >= b ? a : b;
    case BinaryOp::Min: return a <= b ? a : b;
    }
    return kNaN;
}

double evaluate(const Expr& expr, const Bindings& bindings)
{
    std::vector<double> stack;
    stack.reserve(expr.size());
    for (const auto& n : expr.nodes()) {
        switch (n.kind) {
        case NodeKind::Constant: stack.push_back(n.value); break;
        case NodeKind::Variable: stack.push_back(bindings.get(n.variable())); break;
        case NodeKind::Unary: stack.back() = apply(n.unary_op(), stack.back()); break;
        case NodeKind::Binary: {
            const double b = stack.back();
            stack.pop_back();
            stack.back() = apply(n.binary_op(), stack.back(), b);
            break;
        }
        }
    }
    return stack.back();
}

std::vector<double> evaluate_batch(const Expr& expr, const FeatureTable& table)
{
    const std::size_t rows = table.rows;
    for (const auto& n : expr.nodes()) {
        if (n.kind == NodeKind::Variable && !table.has(n.variable())) {
            throw std::invalid_argument("missing column for variable " +
                                        std::string(name(n.variable())));
        }
    }

    // Each stack slot is a full column; slots are reused across nodes.
    std::vector<std::vector<double>> stack;
    std::size_t top = 0;
    auto push = [&]() -> std::vector<double>& {
        if (top == stack.size()) {
            stack.emplace_back(rows);
        }
        return stack[top++];
    };

    for (const auto& n : expr.nodes()) {
        switch (n.kind) {
        case NodeKind::Constant: {
            auto& out = push();
            std::fill(out.begin(), out.end(), n.value);
            break;
        }
        case NodeKind::Variable: {
            auto& out = push();
            const auto col = table.columns[static_cast<std::size_t>(n.variable())];
            std::copy(col.begin(), col.end(), out.begin());
            break;
        }
        case NodeKind::Unary: {
            auto& x = stack[top - 1];
            const auto op = n.unary_op();
            for (auto& v : x) {
                v = apply(op, v);
            }
            break;
        }
        case NodeKind::Binary: {
            auto& a = stack[top - 2];
            const auto& b = stack[top - 1];
            const auto op = n.binary_op();
            for (std::size_t i = 0; i < rows; ++i) {
                a[i] = apply(op, a[i], b[i]);
            }
            --top;
            break;
        }
        }
    }
    return std::move(stack[0]);
}

int complexity(const Expr& expr, const ComplexityWeights& weights)
{
    int total = 0;
    for (const auto& n : expr.nodes()) {
        switch (n.kind) {
        case NodeKind::Constant: total += weights.constant; break;
        case NodeKind::Variable: total += weights.variable; break;
        case NodeKind::Unary: total += weights.unary[n.code]; break;
        case NodeKind::Binary: total += weights.binary[n.code]; break;
        }
    }
    return total;
}

Expr fold_constants(const Expr& expr)
{
    std::vector<Expr> stack;
    for (const auto& n : expr.nodes()) {
        switch (n.kind) {
        case NodeKind::Constant: stack.push_back(Expr::constant(n.value)); break;
        case NodeKind::Variable: stack.push_back(Expr::variable(n.variable())); break;
        case NodeKind::Unary: {
            auto child = std::move(stack.back());
            stack.pop_back();
            if (child.size() == 1 && child.root().kind == NodeKind::Constant) {
                const double v = apply(n.unary_op(), child.root().value);
                if (std::isfinite(v)) {
                    stack.push_back(Expr::constant(v));
                    break;
                }
            }
            stack.push_back(Expr::unary(n.unary_op(), child));
            break;
        }
        case NodeKind::Binary: {
            auto right = std::move(stack.back());
            stack.pop_back();
            auto left = std::move(stack.back());
            stack.pop_back();
            if (left.size() == 1 && right.size() == 1 && left.root().kind == NodeKind::Constant &&
                right.root().kind == NodeKind::Constant) {
                const double v = apply(n.binary_op(), left.root().value, right.root().value);
                if (std::isfinite(v)) {
                    stack.push_back(Expr::constant(v));
                    break;
                }
            }
            stack.push_back(Expr::binary(n.binary_op(), left, right));
            break;
        }
        }
    }
    return std::move(stack.back());
}

Expr quantize_constants(const Expr& expr)
{
    std::vector<Node> nodes(expr.nodes().begin(), expr.nodes().end());
    for (auto& n : nodes) {
        if (n.kind == NodeKind::Constant) {
            n.value = round_significant(n.value);
        }
    }
    return Expr::from_postfix(std::move(nodes));
}

std::string canonical_string(const Expr& expr) { return print(fold_constants(expr)); }

} // namespace dstsr
