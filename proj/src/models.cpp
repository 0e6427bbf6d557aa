#include "dstsr/models.hpp"

#include "dstsr/csv.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace dstsr {

namespace {

struct CatalogRow {
    const char* name;
    const char* text;
    int reported;
};

// Reference equation texts; constants exactly as given.
constexpr CatalogRow kExpressionRows[] = {
    {"C3", "-0.031*Dst", 3},
    {"C5", "-0.041*Dst - Ey", 5},
    {"C7", "-0.05*Dst - max(Ey, -0.16)", 7},
    {"C9", "-0.062*Dst - max(-0.062, Ey/0.638)", 9},
    {"C10", "-0.057*Dst - max(sqrt(Pdyn)*Ey, -0.098)", 10},
    {"C12", "min((-0.05*Dst - Ey)*sqrt(Pdyn), -0.055*Dst)", 12},
    {"C19", "(-0.036*(Pdyn + Dst) - max(-0.008*Dst, Ey))*sqrt(Pdyn + 1.278) + 0.319", 19},
    {"DDM#1", "(-0.036*(Pdyn + Dst) - max(-0.008*Dst, Ey))*sqrt(Pdyn + 1.278) + 0.319", 19},
    {"DDM#2",
     "(-0.042*(Pdyn + Dst) - max(0.168, Ey))*sqrt(Pdyn + max(0.097, min(Ey, 3.385))) + 0.381", 20},
    {"DDM#3", "min(-0.0443*Dst, (0.621 + sqrt(Pdyn))*(-0.0443*Dst - max(Ey, -0.728))) + 0.194", 18},
    {"DDM#4", "min(-0.0443*Dst, (0.621 + sqrt(Pdyn))*(-0.0443*Dst - Ey)) + 0.194", 16},
    {"DDM#5", "min(sqrt(Pdyn + 1.058)*(-0.0434*Dst - Ey), -0.0434*Dst) + 0.136*(2.537 - 0.735*Pdyn)",
     22},
};

std::vector<ModelSpec> build_catalog()
{
    std::vector<ModelSpec> models;
    for (const auto& row : kExpressionRows) {
        auto e = parse(row.text);
        models.emplace_back(row.name, e, row.reported, e.variables());
    }
    models.emplace_back("BMR", Builtin::BMR);
    models.emplace_back("OBM", Builtin::OBM);
    return models;
}

VariableSet builtin_features()
{
    VariableSet s;
    s.set(static_cast<std::size_t>(Variable::Dst));
    s.set(static_cast<std::size_t>(Variable::Ey));
    s.set(static_cast<std::size_t>(Variable::Pdyn));
    return s;
}

} // namespace

ModelSpec::ModelSpec(std::string name, Expr expr, std::optional<int> reported_complexity,
                     VariableSet features)
    : name_(std::move(name))
    , kind_(std::move(expr))
    , reported_(reported_complexity)
    , features_(features)
{
    if ((std::get<Expr>(kind_).variables() & ~features_).any()) {
        throw std::invalid_argument("model " + name_ + " uses a variable outside its feature set");
    }
}

ModelSpec::ModelSpec(std::string name, Builtin builtin)
    : name_(std::move(name))
    , kind_(builtin)
    , features_(builtin_features())
{
}

std::optional<int> ModelSpec::computed_complexity() const
{
    if (!is_expression()) {
        return std::nullopt;
    }
    return complexity(expression());
}

std::string ModelSpec::text() const
{
    if (is_expression()) {
        return print(expression());
    }
    if (builtin() == Builtin::BMR) {
        return "-0.13*(Dst - 0.2*sqrt(Pdyn) + 20) + (Ey >= 0.5 ? -5.4*(Ey - 0.5) : 0)";
    }
    return "-(1/tau)*(Dst - 0.2*sqrt(Pdyn) + 20) + (Ey >= 0.5 ? -5.4*(Ey - 0.5) : 0); "
           "tau = Ey < 0.5 ? 7.7 : 3.5";
}

double ring_current_injection(double ey) { return ey >= 0.5 ? -5.4 * (ey - 0.5) : 0.0; }

double bmr_rate(double dst, double ey, double pdyn)
{
    return -0.13 * (dst - 0.2 * std::sqrt(pdyn) + 20.0) + ring_current_injection(ey);
}

double obm_rate(double dst, double ey, double pdyn)
{
    const double tau = ey < 0.5 ? 7.7 : 3.5;
    return -(1.0 / tau) * (dst - 0.2 * std::sqrt(pdyn) + 20.0) + ring_current_injection(ey);
}

double rate(const ModelSpec& spec, double dst, double ey, double pdyn, double pb)
{
    if (spec.is_expression()) {
        Bindings b{{Variable::Dst, dst}, {Variable::Ey, ey}, {Variable::Pdyn, pdyn}, {Variable::PB, pb}};
        return evaluate(spec.expression(), b);
    }
    return spec.builtin() == Builtin::BMR ? bmr_rate(dst, ey, pdyn) : obm_rate(dst, ey, pdyn);
}

const std::vector<ModelSpec>& catalog()
{
    static const std::vector<ModelSpec> models = build_catalog();
    return models;
}

const ModelSpec& catalog_model(std::string_view name)
{
    for (const auto& m : catalog()) {
        if (m.name() == name) {
            return m;
        }
    }
    throw std::out_of_range("unknown catalog model '" + std::string(name) + "'");
}

void write_catalog_csv(std::ostream& out, const std::vector<ModelSpec>& models)
{
    out << "name,kind,expression_text,reported_complexity,computed_complexity\n";
    for (const auto& m : models) {
        const auto rep = m.reported_complexity();
        const auto comp = m.computed_complexity();
        csv::write_row(out, {m.name(), m.is_expression() ? "expression" : "builtin", m.text(),
                             rep ? std::to_string(*rep) : "", comp ? std::to_string(*comp) : ""});
    }
}

std::string_view name(StormClass c)
{
    switch (c) {
    case StormClass::None: return "none";
    case StormClass::Moderate: return "moderate";
    case StormClass::Intense: return "intense";
    case StormClass::Extreme: return "extreme";
    }
    return "?";
}

StormClass classify_storm(double min_dst)
{
    if (min_dst <= -250.0) return StormClass::Extreme;
    if (min_dst <= -100.0) return StormClass::Intense;
    if (min_dst <= -50.0) return StormClass::Moderate;
    return StormClass::None;
}

} // namespace dstsr
