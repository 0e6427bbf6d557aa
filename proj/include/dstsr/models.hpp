#pragma once

#include "dstsr/expr.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dstsr {

/// Piecewise empirical baselines that are not single expression trees.
enum class Builtin { BMR, OBM };

/// A named dDst/dt model in nT/h.
class ModelSpec {
public:
    /// Throws std::invalid_argument if `expr` uses a variable outside `features`.
    ModelSpec(std::string name, Expr expr, std::optional<int> reported_complexity = std::nullopt,
              VariableSet features = all_variables());
    ModelSpec(std::string name, Builtin builtin);

    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] bool is_expression() const noexcept { return std::holds_alternative<Expr>(kind_); }
    [[nodiscard]] const Expr& expression() const { return std::get<Expr>(kind_); }
    [[nodiscard]] Builtin builtin() const { return std::get<Builtin>(kind_); }
    [[nodiscard]] std::optional<int> reported_complexity() const noexcept { return reported_; }
    /// Unit-weight node count; empty for builtins.
    [[nodiscard]] std::optional<int> computed_complexity() const;
    [[nodiscard]] VariableSet features() const noexcept { return features_; }
    /// Expression text, or the piecewise form for builtins.
    [[nodiscard]] std::string text() const;

private:
    std::string name_;
    std::variant<Expr, Builtin> kind_;
    std::optional<int> reported_;
    VariableSet features_;
};

/// Rate in nT/h. NaN results are returned as-is.
double rate(const ModelSpec& spec, double dst, double ey, double pdyn, double pb);

/// Burton-McPherron-Russell: -0.13 (Dst - 0.2 sqrt(Pdyn) + 20) + Q(Ey).
double bmr_rate(double dst, double ey, double pdyn);
/// O'Brien-McPherron: BMR form with 1/tau, tau = 7.7 h for Ey < 0.5, else 3.5 h.
double obm_rate(double dst, double ey, double pdyn);
/// Injection Q = -5.4 (Ey - 0.5) for Ey >= 0.5 mV/m, 0 otherwise.
double ring_current_injection(double ey);

/// The 14 fixed models: complexity hierarchy C3..C19, DDM#1..DDM#5, BMR, OBM.
const std::vector<ModelSpec>& catalog();

/// Throws std::out_of_range for an unknown name.
const ModelSpec& catalog_model(std::string_view name);

/// Columns: name, kind, expression_text, reported_complexity, computed_complexity.
void write_catalog_csv(std::ostream& out, const std::vector<ModelSpec>& models);

enum class StormClass { None, Moderate, Intense, Extreme };

std::string_view name(StormClass c);

/// Boundary values go to the more severe class: -50 is Moderate, -100 is
/// Intense, -250 is Extreme.
StormClass classify_storm(double min_dst);

} // namespace dstsr
