#include "dstsr/forecast.hpp"

#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

using namespace dstsr;

namespace {

DerivedSeries constant_drivers(std::size_t n, double ey, double pdyn, double dst = 0.0)
{
    DerivedSeries s;
    const auto t0 = parse_timestamp("2021-05-01T00:00:00Z");
    for (std::size_t i = 0; i < n; ++i) {
        s.append({t0 + Hours{static_cast<long>(i)}, ey, pdyn, 0.0, dst, dst, 0.0});
    }
    return s;
}

} // namespace

TEST_CASE("C3 decay matches the closed form")
{
    const auto r = integrate(catalog_model("C3"), -100.0, constant_drivers(60, 0, 1), 48);
    REQUIRE(r.predicted.size() == 49);
    CHECK(r.valid());
    CHECK(r.predicted[0] == -100.0);
    for (std::size_t k = 0; k <= 48; ++k) {
        CHECK(r.predicted[k] == doctest::Approx(-100.0 * std::pow(0.969, static_cast<double>(k))).epsilon(1e-12));
    }
    CHECK(r.predicted[48] == doctest::Approx(-22.05).epsilon(0.05 / 22.05));
}

TEST_CASE("horizon zero returns the initial value")
{
    const auto r = integrate(catalog_model("BMR"), -42.0, constant_drivers(5, 1, 1), 0);
    REQUIRE(r.predicted.size() == 1);
    CHECK(r.predicted[0] == -42.0);
}

TEST_CASE("BMR converges monotonically to its fixed point")
{
    const auto r = integrate(catalog_model("BMR"), -100.0, constant_drivers(80, 0, 1), 72);
    for (std::size_t k = 1; k < r.predicted.size(); ++k) CHECK(r.predicted[k] > r.predicted[k - 1]);
    CHECK(std::abs(r.predicted.back() - -19.8) < 0.5);
}

TEST_CASE("a zero-rate model holds its initial value")
{
    const ModelSpec zero("zero", parse("0"));
    const auto r = integrate(zero, -55.0, constant_drivers(30, 3, 2), 24);
    for (double v : r.predicted) CHECK(v == -55.0);
}

TEST_CASE("one Euler step uses the drivers at the current hour")
{
    DerivedSeries s = constant_drivers(3, 0, 1);
    DerivedSeries t;
    for (std::size_t i = 0; i < s.size(); ++i) {
        auto row = s.row(i);
        row.ey = i == 0 ? 2.0 : 100.0;
        t.append(row);
    }
    const auto spec = catalog_model("C5");
    const auto r = integrate(spec, -10.0, t, 1);
    CHECK(r.predicted[1] == doctest::Approx(-10.0 + rate(spec, -10.0, 2.0, 1.0, 0.0)));
}

TEST_CASE("linear decay is linear in the initial value")
{
    const auto d = constant_drivers(30, 0, 1);
    const auto a = integrate(catalog_model("C3"), -50.0, d, 24);
    const auto b = integrate(catalog_model("C3"), -100.0, d, 24);
    for (std::size_t k = 0; k <= 24; ++k) CHECK(b.predicted[k] == doctest::Approx(2 * a.predicted[k]));
}

TEST_CASE("integration stops at a non-finite rate")
{
    const ModelSpec bad("bad", parse("log(Dst)"));
    const auto r = integrate(bad, -10.0, constant_drivers(10, 0, 1), 5);
    CHECK_FALSE(r.valid());
    CHECK(r.invalid_step == 0u);
}

TEST_CASE("integrate validates its inputs")
{
    const auto d = constant_drivers(10, 0, 1);
    CHECK_THROWS_AS(integrate(catalog_model("C3"), std::nan(""), d, 5), std::invalid_argument);
    CHECK_THROWS_AS(integrate(catalog_model("C3"), -10.0, d, 7, 5), std::invalid_argument);
    CHECK_NOTHROW(integrate(catalog_model("C3"), -10.0, d, 5, 5));
}

TEST_CASE("actual values are attached when the series covers the window")
{
    const auto d = constant_drivers(10, 0, 1, -7.0);
    const auto r = integrate(catalog_model("C3"), -7.0, d, 2, 4);
    REQUIRE(r.actual.has_value());
    CHECK(r.actual->size() == 5);
    CHECK(format_timestamp(r.start) == "2021-05-01T02:00:00Z");
    const auto edge = integrate(catalog_model("C3"), -7.0, d, 5, 5);
    CHECK_FALSE(edge.actual.has_value());
}

TEST_CASE("window sampling")
{
    auto s = constant_drivers(100, 0, 1);
    DerivedSeries gapped;
    for (std::size_t i = 0; i < s.size(); ++i) {
        auto r = s.row(i);
        if (i == 50) r.pdyn = std::nan("");
        gapped.append(r);
    }
    std::mt19937_64 rng(1);
    const auto w = valid_windows(gapped, 10, 1000, rng);
    CHECK(w.shortfall);
    // starts 0..39 and 51..89 are clean
    CHECK(w.starts.size() == 40 + 39);
    CHECK(std::is_sorted(w.starts.begin(), w.starts.end()));
    for (auto st : w.starts) CHECK((st + 10 < 50 || st > 50));

    std::mt19937_64 a(7), b(7);
    const auto x = valid_windows(s, 10, 20, a), y = valid_windows(s, 10, 20, b);
    CHECK(x.starts == y.starts);
    CHECK(x.starts.size() == 20);
    CHECK_FALSE(x.shortfall);
    CHECK(std::set<std::size_t>(x.starts.begin(), x.starts.end()).size() == 20);
    CHECK_THROWS_AS(valid_windows(s, 100, 1, a), std::invalid_argument);
}

TEST_CASE("forecast CSV")
{
    const auto r = integrate(catalog_model("C3"), -100.0, constant_drivers(5, 0, 1), 2);
    std::ostringstream out;
    write_forecast_csv(out, r);
    CHECK(out.str() == "timestamp,predicted_dst,actual_dst\n"
                       "2021-05-01T00:00:00Z,-100,0\n"
                       "2021-05-01T01:00:00Z,-96.9,0\n"
                       "2021-05-01T02:00:00Z,-93.8961,0\n");
}
