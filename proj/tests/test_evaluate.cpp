#include "dstsr/evaluate.hpp"

#include "synthetic.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace dstsr;

namespace {

DerivedSeries storm_series()
{
    // Two days of quiet time, a 72 h storm from 2003-10-29 and a day after it.
    const auto start = parse_timestamp("2003-10-27T00:00:00Z");
    return testing::synthetic_series(
        24 * 6, 21,
        [](double dst, double ey, double pdyn) {
            return -0.05 * dst - std::max(ey, -0.16) + 0.1 * std::sqrt(pdyn);
        },
        start);
}

} // namespace

TEST_CASE("metrics")
{
    const std::vector<double> p{0, 0}, a{3, 4};
    const auto m = metrics(p, a);
    CHECK(m.rmse == doctest::Approx(3.53553).epsilon(1e-5));
    CHECK(m.mae == 3.5);
    CHECK(metrics(a, a).rmse == 0.0);
    CHECK_THROWS_AS(metrics(std::vector<double>{}, std::vector<double>{}), std::invalid_argument);
    CHECK_THROWS_AS(metrics(p, std::vector<double>{1}), std::invalid_argument);
}

TEST_CASE("rmse is never below mae")
{
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> len(1, 60);
    std::normal_distribution<double> g(0, 50);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> p(static_cast<std::size_t>(len(rng))), a(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) {
            p[i] = g(rng);
            a[i] = g(rng);
        }
        const auto m = metrics(p, a);
        CHECK(m.rmse >= m.mae - 1e-12);
    }
}

TEST_CASE("forecast metrics skip the initial condition")
{
    DerivedSeries s;
    const auto t0 = parse_timestamp("2021-05-01T00:00:00Z");
    for (int i = 0; i < 5; ++i) s.append({t0 + Hours{i}, 0, 1, 0, -10.0 - i, 0, 0});
    const ModelSpec zero("zero", parse("0"));
    const auto m = forecast_metrics(integrate(zero, -10.0, s, 0, 4));
    // errors 1, 2, 3, 4
    CHECK(m.mae == 2.5);
    CHECK(m.rmse == doctest::Approx(std::sqrt(7.5)));
}

TEST_CASE("benchmark scores every model on one window set")
{
    const auto series = testing::synthetic_series(
        600, 5, [](double dst, double ey, double) { return -0.05 * dst - ey; });
    const std::vector<ModelSpec> models{ModelSpec("exact", parse("-0.05*Dst - Ey")), catalog_model("C3"),
                                        catalog_model("BMR"), ModelSpec("nan", parse("sqrt(-1 - square(Dst))"))};
    BenchmarkOptions opt;
    opt.horizon = 24;
    opt.count = 50;
    opt.seed = 3;
    const auto report = benchmark(models, series, opt);
    CHECK(report.window_starts.size() == 50);
    CHECK_FALSE(report.shortfall);
    CHECK(report.row("exact").mean_rmse == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(report.row("exact").n_windows == 50);
    CHECK(report.row("nan").n_windows == 0);
    CHECK(report.row("nan").n_excluded == 50);
    CHECK(std::isnan(report.row("nan").mean_rmse));
    CHECK(report.ranking_by_rmse.front() == "exact");
    CHECK(report.ranking_by_rmse.back() == "nan");
    CHECK(rank(report, Metric::Mae, 2).size() == 2);
    for (const auto& r : report.rows) {
        if (r.n_windows) CHECK(r.mean_rmse >= r.mean_mae - 1e-12);
    }

    auto threaded = opt;
    threaded.threads = 3;
    const auto again = benchmark(models, series, threaded);
    std::ostringstream x, y;
    write_report_csv(x, report);
    write_report_csv(y, again);
    CHECK(x.str() == y.str());
    CHECK(x.str().rfind("model,mean_rmse,std_rmse,mean_mae,std_mae,n_windows,n_excluded\nexact,", 0) == 0);

    opt.count = 10000;
    const auto small = benchmark(models, series, opt);
    CHECK(small.shortfall);
    CHECK(small.window_starts.size() == 600 - 24);
}

TEST_CASE("population standard deviation")
{
    // Windows have errors of 0 and 2 for a constant offset model on a flat series.
    DerivedSeries s;
    const auto t0 = parse_timestamp("2021-05-01T00:00:00Z");
    for (int i = 0; i < 3; ++i) s.append({t0 + Hours{i}, 0, 1, 0, i == 2 ? -2.0 : 0.0, 0, 0});
    BenchmarkOptions opt;
    opt.horizon = 1;
    opt.count = 2;
    const auto r = benchmark({ModelSpec("zero", parse("0"))}, s, opt);
    CHECK(r.row("zero").mean_mae == 1.0);
    CHECK(r.row("zero").std_mae == 1.0);
}

TEST_CASE("storm events")
{
    CHECK(builtin_storm_events().size() == 3);
    const auto h = find_storm_event("halloween-2003");
    REQUIRE(h.has_value());
    CHECK(format_timestamp(h->window.start()) == "2003-10-29T00:00:00Z");
    CHECK(h->window.duration() == Hours{72});
    CHECK_FALSE(find_storm_event("nope").has_value());
}

TEST_CASE("storm evaluation")
{
    const auto series = storm_series();
    const auto event = *find_storm_event("halloween-2003");
    const auto fit = TimeRange::parse("1995-01-01", "2021-03-31");
    const auto report = storm_eval(catalog(), event, series, fit);
    CHECK(report.actual.size() == 73);
    CHECK(report.in_sample);
    CHECK(report.models.size() == 14);
    CHECK(report.classification == classify_storm(report.min_actual));
    for (const auto& m : report.models) {
        CHECK(m.forecast.predicted.front() == report.actual.front());
        if (m.forecast.valid()) CHECK(m.metrics.rmse >= m.metrics.mae);
    }
    CHECK_FALSE(storm_eval(catalog(), event, series, std::nullopt).in_sample);

    std::ostringstream csv, met;
    write_storm_csv(csv, report);
    write_storm_metrics_csv(met, report);
    const auto text = csv.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 74);
    CHECK(met.str().rfind("model,rmse,mae,valid,sample\n", 0) == 0);

    StormEvent late{"late", TimeRange(series.time().back(), series.time().back() + Hours{72}), std::nullopt};
    CHECK_THROWS_AS(storm_eval(catalog(), late, series, fit), std::invalid_argument);
    StormEvent short_window{"short", TimeRange::parse("2003-10-29", "2003-10-30"), std::nullopt};
    CHECK_THROWS_AS(storm_eval(catalog(), short_window, series, fit), std::invalid_argument);

    const auto around = storm_window_around_minimum("min", series, TimeRange::parse("2003-10-28", "2003-10-31"));
    CHECK(around.window.duration() == Hours{72});
}
