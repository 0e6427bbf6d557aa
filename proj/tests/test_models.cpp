#include "dstsr/models.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace dstsr;

TEST_CASE("catalog has the fourteen models in order")
{
    const auto& cat = catalog();
    REQUIRE(cat.size() == 14);
    const char* names[] = {"C3", "C5", "C7", "C9", "C10", "C12", "C19",
                           "DDM#1", "DDM#2", "DDM#3", "DDM#4", "DDM#5", "BMR", "OBM"};
    for (std::size_t i = 0; i < 14; ++i) CHECK(cat[i].name() == names[i]);
    CHECK_THROWS_AS(catalog_model("C4"), std::out_of_range);
}

TEST_CASE("computed complexities")
{
    const std::pair<const char*, int> expected[] = {
        {"C3", 3}, {"C5", 5}, {"C7", 7}, {"C9", 9}, {"C10", 10}, {"C12", 12},
        {"DDM#1", 18}, {"DDM#2", 20}, {"DDM#3", 18}, {"DDM#4", 16}, {"DDM#5", 22}};
    for (const auto& [n, c] : expected) {
        CAPTURE(n);
        CHECK(catalog_model(n).computed_complexity() == c);
    }
    CHECK(catalog_model("DDM#1").reported_complexity() == 19);
    CHECK_FALSE(catalog_model("BMR").computed_complexity().has_value());
}

TEST_CASE("expression models exclude PB")
{
    for (const auto& m : catalog()) {
        if (m.is_expression()) {
            CHECK_FALSE(m.expression().variables().test(static_cast<std::size_t>(Variable::PB)));
        }
    }
    CHECK_THROWS_AS(ModelSpec("bad", parse("PB"), std::nullopt, VariableSet{0b0111}), std::invalid_argument);
}

TEST_CASE("BMR and OBM values")
{
    CHECK(bmr_rate(-20, 0, 1) == doctest::Approx(-0.13 * (-20 - 0.2 + 20)));
    CHECK(bmr_rate(-20, 0, 1) == doctest::Approx(0.026));
    CHECK(bmr_rate(-20, 1, 1) == doctest::Approx(0.026 - 2.7));
    CHECK(obm_rate(-20, 1, 1) == doctest::Approx(0.2 / 3.5 - 2.7).epsilon(1e-12));
    CHECK(obm_rate(-20, 1, 1) == doctest::Approx(-2.642857142857).epsilon(1e-9));
    CHECK(obm_rate(-20, 0.4, 1) == doctest::Approx(0.2 / 7.7));
    CHECK(ring_current_injection(0.5) == 0.0);
    CHECK(ring_current_injection(0.49) == 0.0);
    CHECK(ring_current_injection(1.5) == doctest::Approx(-5.4));
    CHECK(std::isnan(bmr_rate(-20, 0, -1)));
}

TEST_CASE("rate dispatches through the spec")
{
    CHECK(rate(catalog_model("C3"), -100, 5, 2, 0) == doctest::Approx(3.1));
    CHECK(rate(catalog_model("DDM#1"), 0, 0, 0, 0) == doctest::Approx(0.319));
    CHECK(rate(catalog_model("BMR"), -20, 0, 1, 0) == bmr_rate(-20, 0, 1));
    CHECK(rate(catalog_model("DDM#4"), -50, 0, 0, 0) == doctest::Approx(1.569515).epsilon(1e-12));
}

TEST_CASE("storm classification")
{
    CHECK(classify_storm(-49.9) == StormClass::None);
    CHECK(classify_storm(-50) == StormClass::Moderate);
    CHECK(classify_storm(-99.9) == StormClass::Moderate);
    CHECK(classify_storm(-100) == StormClass::Intense);
    CHECK(classify_storm(-249.9) == StormClass::Intense);
    CHECK(classify_storm(-250) == StormClass::Extreme);
    CHECK(classify_storm(-400) == StormClass::Extreme);
    CHECK(name(StormClass::Intense) == "intense");

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-500, 50);
    for (int i = 0; i < 1000; ++i) {
        double a = u(rng), b = u(rng);
        if (a > b) std::swap(a, b);
        CHECK(static_cast<int>(classify_storm(a)) >= static_cast<int>(classify_storm(b)));
    }
}

TEST_CASE("catalog CSV")
{
    std::ostringstream out;
    write_catalog_csv(out, catalog());
    const auto text = out.str();
    CHECK(text.rfind("name,kind,expression_text,reported_complexity,computed_complexity\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 15);
}
