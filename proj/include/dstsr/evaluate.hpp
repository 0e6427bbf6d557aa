#pragma once

#include "dstsr/dataset.hpp"
#include "dstsr/forecast.hpp"
#include "dstsr/models.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dstsr {

struct Metrics {
    double rmse = 0.0; // nT
    double mae = 0.0;  // nT
};

/// Throws std::invalid_argument on empty or mismatched inputs.
Metrics metrics(std::span<const double> predicted, std::span<const double> actual);

/// Error of a forecast over steps 1..horizon; the initial condition is excluded.
Metrics forecast_metrics(const ForecastResult& result);

struct ModelScore {
    std::string model;
    double mean_rmse = 0.0;
    double std_rmse = 0.0;
    double mean_mae = 0.0;
    double std_mae = 0.0;
    std::size_t n_windows = 0;  // windows scored for this model
    std::size_t n_excluded = 0; // windows dropped because the trajectory went non-finite
};

struct BenchmarkOptions {
    std::size_t horizon = 48;
    std::size_t count = 2000;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
};

struct BenchmarkReport {
    std::vector<ModelScore> rows; // input model order
    std::vector<std::size_t> window_starts;
    std::size_t requested_windows = 0;
    bool shortfall = false;
    std::vector<std::string> ranking_by_rmse;
    std::vector<std::string> ranking_by_mae;

    [[nodiscard]] const ModelScore& row(std::string_view model) const;
};

/// Every model is integrated over one shared random window set; per-window
/// metrics are summarised by mean and population standard deviation. Throws
/// std::invalid_argument when no valid window exists.
BenchmarkReport benchmark(const std::vector<ModelSpec>& models, const DerivedSeries& series,
                          const BenchmarkOptions& options = {});

enum class Metric { Rmse, Mae };

/// Top-k names by the chosen mean; ties by the other mean, then name. Models
/// without any scored window sort last.
std::vector<std::string> rank(const BenchmarkReport& report, Metric metric, std::size_t k);

/// Columns: model, mean_rmse, std_rmse, mean_mae, std_mae, n_windows,
/// n_excluded. Rows ordered by mean MAE.
void write_report_csv(std::ostream& out, const BenchmarkReport& report);

struct StormEvent {
    std::string name;
    TimeRange window;
    std::optional<StormClass> reference;
};

inline constexpr std::size_t kStormHours = 72;

/// halloween-2003, stpatricks-2015, moderate-2017; each 72 h from 00 UT on
/// the event date.
const std::vector<StormEvent>& builtin_storm_events();
std::optional<StormEvent> find_storm_event(std::string_view name);

/// 72 h window starting `lead` hours before the Dst minimum inside `search`.
StormEvent storm_window_around_minimum(std::string name, const DerivedSeries& series,
                                       const TimeRange& search, std::size_t lead_hours = 12);

struct StormModelResult {
    ForecastResult forecast;
    Metrics metrics; // NaN when the trajectory went non-finite
};

struct StormReport {
    StormEvent event;
    std::vector<double> actual; // 73 hourly values including the start
    double min_actual = 0.0;
    StormClass classification = StormClass::None;
    bool in_sample = false;
    std::vector<StormModelResult> models;

    [[nodiscard]] const StormModelResult& model(std::string_view name) const;
};

/// Throws std::invalid_argument unless the window is exactly 72 h and the
/// series covers it with consecutive finite hours. `fit_range` only sets the
/// in-sample label.
StormReport storm_eval(const std::vector<ModelSpec>& models, const StormEvent& event,
                       const DerivedSeries& series,
                       const std::optional<TimeRange>& fit_range = std::nullopt);

/// Columns: timestamp, actual, then one column per model.
void write_storm_csv(std::ostream& out, const StormReport& report);
/// Columns: model, rmse, mae, valid, sample.
void write_storm_metrics_csv(std::ostream& out, const StormReport& report);

} // namespace dstsr
