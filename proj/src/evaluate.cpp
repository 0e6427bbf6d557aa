#include "dstsr/evaluate.hpp"

#include "dstsr/csv.hpp"
#include "dstsr/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace dstsr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::pair<double, double> mean_and_std(const std::vector<double>& xs)
{
    if (xs.empty()) {
        return {kNaN, kNaN};
    }
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : xs) {
        ss += (x - mean) * (x - mean);
    }
    return {mean, std::sqrt(ss / n)};
}

// NaN-aware ascending compare: NaN sorts after every number.
int compare(double a, double b)
{
    const bool na = std::isnan(a), nb = std::isnan(b);
    if (na || nb) return na == nb ? 0 : (na ? 1 : -1);
    return a < b ? -1 : a > b ? 1 : 0;
}

std::vector<const ModelScore*> ordered(const BenchmarkReport& report, Metric metric)
{
    std::vector<const ModelScore*> rows;
    for (const auto& r : report.rows) rows.push_back(&r);
    std::sort(rows.begin(), rows.end(), [metric](const ModelScore* a, const ModelScore* b) {
        const bool by_rmse = metric == Metric::Rmse;
        int c = compare(by_rmse ? a->mean_rmse : a->mean_mae, by_rmse ? b->mean_rmse : b->mean_mae);
        if (c == 0) c = compare(by_rmse ? a->mean_mae : a->mean_rmse, by_rmse ? b->mean_mae : b->mean_rmse);
        if (c == 0) return a->model < b->model;
        return c < 0;
    });
    return rows;
}

} // namespace

Metrics metrics(std::span<const double> predicted, std::span<const double> actual)
{
    if (predicted.empty() || predicted.size() != actual.size()) {
        throw std::invalid_argument("metrics needs equal, nonempty lengths");
    }
    double se = 0.0, ae = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double d = predicted[i] - actual[i];
        se += d * d;
        ae += std::abs(d);
    }
    const double n = static_cast<double>(predicted.size());
    return {std::sqrt(se / n), ae / n};
}

Metrics forecast_metrics(const ForecastResult& result)
{
    if (!result.actual) {
        throw std::invalid_argument("forecast has no aligned actual values");
    }
    if (!result.valid() || result.horizon == 0) {
        return {kNaN, kNaN};
    }
    const std::span<const double> p(result.predicted);
    const std::span<const double> a(*result.actual);
    return metrics(p.subspan(1, result.horizon), a.subspan(1, result.horizon));
}

const ModelScore& BenchmarkReport::row(std::string_view model) const
{
    for (const auto& r : rows) {
        if (r.model == model) return r;
    }
    throw std::out_of_range("no report row for model '" + std::string(model) + "'");
}

BenchmarkReport benchmark(const std::vector<ModelSpec>& models, const DerivedSeries& series,
                          const BenchmarkOptions& options)
{
    if (options.horizon == 0) {
        throw std::invalid_argument("benchmark horizon must be positive");
    }
    std::mt19937_64 rng(options.seed);
    auto windows = valid_windows(series, options.horizon, options.count, rng);
    if (windows.starts.empty()) {
        throw std::invalid_argument("no valid forecast windows in the series");
    }

    const std::size_t n_windows = windows.starts.size();
    std::vector<Metrics> per(models.size() * n_windows);
    const auto dst = series.dst();
    parallel_for(models.size() * n_windows, options.threads, [&](std::size_t task) {
        const std::size_t m = task / n_windows;
        const std::size_t s = windows.starts[task % n_windows];
        per[task] = forecast_metrics(integrate(models[m], dst[s], series, s, options.horizon));
    });

    BenchmarkReport report;
    report.window_starts = std::move(windows.starts);
    report.requested_windows = options.count;
    report.shortfall = windows.shortfall;
    for (std::size_t m = 0; m < models.size(); ++m) {
        std::vector<double> rmse, mae;
        for (std::size_t w = 0; w < n_windows; ++w) {
            const auto& x = per[m * n_windows + w];
            if (std::isfinite(x.rmse) && std::isfinite(x.mae)) {
                rmse.push_back(x.rmse);
                mae.push_back(x.mae);
            }
        }
        ModelScore row;
        row.model = models[m].name();
        std::tie(row.mean_rmse, row.std_rmse) = mean_and_std(rmse);
        std::tie(row.mean_mae, row.std_mae) = mean_and_std(mae);
        row.n_windows = rmse.size();
        row.n_excluded = n_windows - rmse.size();
        report.rows.push_back(row);
    }
    report.ranking_by_rmse = rank(report, Metric::Rmse, report.rows.size());
    report.ranking_by_mae = rank(report, Metric::Mae, report.rows.size());
    return report;
}

std::vector<std::string> rank(const BenchmarkReport& report, Metric metric, std::size_t k)
{
    std::vector<std::string> names;
    for (const auto* r : ordered(report, metric)) {
        if (names.size() == k) break;
        names.push_back(r->model);
    }
    return names;
}

void write_report_csv(std::ostream& out, const BenchmarkReport& report)
{
    out << "model,mean_rmse,std_rmse,mean_mae,std_mae,n_windows,n_excluded\n";
    for (const auto* r : ordered(report, Metric::Mae)) {
        csv::write_row(out, {r->model, csv::format_number(r->mean_rmse), csv::format_number(r->std_rmse),
                             csv::format_number(r->mean_mae), csv::format_number(r->std_mae),
                             std::to_string(r->n_windows), std::to_string(r->n_excluded)});
    }
}

const std::vector<StormEvent>& builtin_storm_events()
{
    static const std::vector<StormEvent> events = [] {
        auto ev = [](const char* name, const char* start, StormClass cls) {
            const auto t = parse_timestamp(start);
            return StormEvent{name, TimeRange(t, t + Hours{kStormHours}), cls};
        };
        return std::vector<StormEvent>{
            ev("halloween-2003", "2003-10-29T00:00:00Z", StormClass::Extreme),
            ev("stpatricks-2015", "2015-03-17T00:00:00Z", StormClass::Intense),
            ev("moderate-2017", "2017-09-27T00:00:00Z", StormClass::Moderate),
        };
    }();
    return events;
}

std::optional<StormEvent> find_storm_event(std::string_view name)
{
    for (const auto& e : builtin_storm_events()) {
        if (e.name == name) return e;
    }
    return std::nullopt;
}

StormEvent storm_window_around_minimum(std::string name, const DerivedSeries& series,
                                       const TimeRange& search, std::size_t lead_hours)
{
    const auto time = series.time();
    const auto dst = series.dst();
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (search.contains(time[i]) && std::isfinite(dst[i]) && (!best || dst[i] < dst[*best])) {
            best = i;
        }
    }
    if (!best) {
        throw std::invalid_argument("no Dst values inside the search range");
    }
    const auto start = time[*best] - Hours{static_cast<long>(lead_hours)};
    return StormEvent{std::move(name), TimeRange(start, start + Hours{kStormHours}), std::nullopt};
}

const StormModelResult& StormReport::model(std::string_view name) const
{
    for (const auto& m : models) {
        if (m.forecast.model == name) return m;
    }
    throw std::out_of_range("no storm result for model '" + std::string(name) + "'");
}

StormReport storm_eval(const std::vector<ModelSpec>& models, const StormEvent& event,
                       const DerivedSeries& series, const std::optional<TimeRange>& fit_range)
{
    if (event.window.duration() != Hours{kStormHours}) {
        throw std::invalid_argument("storm window must span exactly 72 h");
    }
    const std::size_t start = series.find(event.window.start());
    if (start == series.size() || series.size() - start < kStormHours + 1) {
        throw std::invalid_argument("series does not cover storm window " +
                                    format_timestamp(event.window.start()) + " .. " +
                                    format_timestamp(event.window.end()));
    }
    const auto time = series.time();
    const auto dst = series.dst();
    for (std::size_t k = 0; k <= kStormHours; ++k) {
        const std::size_t i = start + k;
        const bool finite = std::isfinite(dst[i]) && std::isfinite(series.ey()[i]) &&
                            std::isfinite(series.pdyn()[i]) && std::isfinite(series.pb()[i]);
        if (!finite || (k > 0 && time[i] - time[i - 1] != Hours{1})) {
            throw std::invalid_argument("coverage gap in storm window at " + format_timestamp(time[i]));
        }
    }

    StormReport report{event, {}, 0.0, StormClass::None, false, {}};
    report.actual.assign(dst.begin() + static_cast<std::ptrdiff_t>(start),
                         dst.begin() + static_cast<std::ptrdiff_t>(start + kStormHours + 1));
    report.min_actual = *std::min_element(report.actual.begin(), report.actual.end());
    report.classification = classify_storm(report.min_actual);
    report.in_sample = fit_range && fit_range->start() <= event.window.start() &&
                       event.window.start() < fit_range->end();
    for (const auto& spec : models) {
        auto fc = integrate(spec, report.actual[0], series, start, kStormHours);
        const auto m = forecast_metrics(fc);
        report.models.push_back({std::move(fc), m});
    }
    return report;
}

void write_storm_csv(std::ostream& out, const StormReport& report)
{
    std::vector<std::string> header{"timestamp", "actual"};
    for (const auto& m : report.models) header.push_back(m.forecast.model);
    csv::write_row(out, header);
    for (std::size_t k = 0; k < report.actual.size(); ++k) {
        std::vector<std::string> row{format_timestamp(report.event.window.start() + Hours{static_cast<long>(k)}),
                                     csv::format_number(report.actual[k])};
        for (const auto& m : report.models) {
            const auto& p = m.forecast.predicted;
            row.push_back(k < p.size() ? csv::format_number(p[k]) : "");
        }
        csv::write_row(out, row);
    }
}

void write_storm_metrics_csv(std::ostream& out, const StormReport& report)
{
    out << "model,rmse,mae,valid,sample\n";
    for (const auto& m : report.models) {
        csv::write_row(out, {m.forecast.model, csv::format_number(m.metrics.rmse),
                             csv::format_number(m.metrics.mae), m.forecast.valid() ? "true" : "false",
                             report.in_sample ? "in-sample" : "out-of-sample"});
    }
}

} // namespace dstsr
