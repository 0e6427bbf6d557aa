#include "dstsr/expr.hpp"

namespace dstsr {

namespace {

Expr grow(Rng& rng, std::size_t depth_left, const RandomTreeOptions& options)
{
    const auto& ops = options.operators;
    const std::size_t n_ops = ops.unary.size() + ops.binary.size();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (depth_left <= 1 || n_ops == 0 || unit(rng) < options.leaf_probability) {
        return random_leaf(rng, options);
    }
    std::uniform_int_distribution<std::size_t> pick(0, n_ops - 1);
    const std::size_t k = pick(rng);
    if (k < ops.unary.size()) {
        return Expr::unary(ops.unary[k], grow(rng, depth_left - 1, options));
    }
    auto left = grow(rng, depth_left - 1, options);
    auto right = grow(rng, depth_left - 1, options);
    return Expr::binary(ops.binary[k - ops.unary.size()], left, right);
}

} // namespace

Expr random_leaf(Rng& rng, const RandomTreeOptions& options)
{
    if (options.features.empty()) {
        throw std::invalid_argument("random_expr requires at least one feature");
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (unit(rng) < options.variable_probability) {
        std::uniform_int_distribution<std::size_t> pick(0, options.features.size() - 1);
        return Expr::variable(options.features[pick(rng)]);
    }
    std::uniform_real_distribution<double> c(options.constant_min, options.constant_max);
    return Expr::constant(round_significant(c(rng)));
}

Expr random_expr(Rng& rng, std::size_t max_depth, const RandomTreeOptions& options)
{
    if (max_depth < 1) {
        throw std::invalid_argument("random_expr requires max_depth >= 1");
    }
    if (options.features.empty()) {
        throw std::invalid_argument("random_expr requires at least one feature");
    }
    return grow(rng, max_depth, options);
}

} // namespace dstsr
