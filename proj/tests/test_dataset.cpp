#include "dstsr/dataset.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace dstsr;

namespace {

const char* kHeader = "timestamp,Vsw,Bz_gsm,n_sw,B_mag,T_sw,Dst\n";

std::vector<RawRecord> read(const std::string& body)
{
    std::istringstream in(kHeader + body);
    return read_csv(in);
}

} // namespace

TEST_CASE("sentinels become missing values")
{
    const auto r = read("2003-10-29T00:00:00Z,9999.9,999.9,5,99999,9999999.,-20\n"
                        "2003-10-29T01:00:00Z,400,-5,999.9,10,1e5,9999.9\n");
    REQUIRE(r.size() == 2);
    CHECK(std::isnan(r[0].vsw));
    CHECK(std::isnan(r[0].bz));
    CHECK(r[0].n_sw == 5);
    CHECK(std::isnan(r[0].b_mag));
    CHECK(std::isnan(r[0].t_sw));
    CHECK(std::isnan(r[1].n_sw));
    CHECK(std::isnan(r[1].dst));
    CHECK(r[1].vsw == 400);
}

TEST_CASE("columns bind by name")
{
    std::istringstream in("Dst,timestamp,Bz_gsm,Vsw,n_sw,B_mag,T_sw\n-7,2001-01-01 05:00,1,300,4,5,1e5\n");
    const auto r = read_csv(in);
    REQUIRE(r.size() == 1);
    CHECK(r[0].dst == -7);
    CHECK(r[0].vsw == 300);
    CHECK(format_timestamp(r[0].time) == "2001-01-01T05:00:00Z");
}

TEST_CASE("schema errors name the column or line")
{
    std::istringstream no_dst("timestamp,Vsw,Bz_gsm,n_sw,B_mag,T_sw\n");
    try {
        (void)read_csv(no_dst);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("Dst") != std::string::npos);
    }
    try {
        (void)read("2003-10-29T00:00:00Z,400,-5,5,10,1e5,-20\n2003-10-29T01:00:00Z,abc,-5,5,10,1e5,-20\n");
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(read("2003-10-29T00:00:00Z,400,-5\n"), DataError);
    CHECK_THROWS_AS(read("2003-10-29T00:30:00Z,400,-5,5,10,1e5,-20\n"), DataError);
    CHECK_THROWS_AS(read("2003-10-29T01:00:00Z,400,-5,5,10,1e5,-20\n2003-10-29T01:00:00Z,400,-5,5,10,1e5,-20\n"),
                    DataError);
}

TEST_CASE("repair interpolates interior runs and fills edges")
{
    const auto r = read("2000-01-01T00:00:00Z,,1,1,1,1,\n"
                        "2000-01-01T01:00:00Z,400,1,1,1,1,-10\n"
                        "2000-01-01T02:00:00Z,,1,1,1,1,\n"
                        "2000-01-01T03:00:00Z,,1,1,1,1,\n"
                        "2000-01-01T04:00:00Z,700,1,1,1,1,-40\n"
                        "2000-01-01T05:00:00Z,,1,1,1,1,\n");
    RepairStats stats;
    const auto fixed = repair_gaps(r, &stats);
    REQUIRE(fixed.size() == 6);
    CHECK(fixed[0].vsw == 400);
    CHECK(fixed[2].vsw == doctest::Approx(500));
    CHECK(fixed[3].vsw == doctest::Approx(600));
    CHECK(fixed[5].vsw == 700);
    CHECK(fixed[2].dst == doctest::Approx(-20));
    CHECK(fixed[5].dst == -40);
    CHECK(stats.filled[static_cast<std::size_t>(RawField::Vsw)] == 4);
    CHECK(stats.inserted_rows == 0);
}

TEST_CASE("repair inserts missing hours")
{
    const auto r = read("2000-01-01T00:00:00Z,400,1,1,1,1,-10\n"
                        "2000-01-01T03:00:00Z,700,1,1,1,1,-40\n");
    RepairStats stats;
    const auto fixed = repair_gaps(r, &stats);
    REQUIRE(fixed.size() == 4);
    CHECK(stats.inserted_rows == 2);
    CHECK(format_timestamp(fixed[1].time) == "2000-01-01T01:00:00Z");
    CHECK(fixed[1].vsw == doctest::Approx(500));
    CHECK(fixed[2].dst == doctest::Approx(-30));

    CHECK(repair_gaps(fixed) == fixed);
    CHECK_THROWS_AS(repair_gaps(read("2000-01-01T00:00:00Z,400,1,1,1,1,\n")), DataError);
}

TEST_CASE("driver formulas")
{
    CHECK(convective_electric_field(400, -5) == doctest::Approx(2.0));
    CHECK(convective_electric_field(400, 5) == doctest::Approx(-2.0));
    CHECK(dynamic_pressure(5, 400) == doctest::Approx(1.6726e-6 * 5 * 400 * 400));
    CHECK(dynamic_pressure(5, 400) == doctest::Approx(1.33808).epsilon(1e-6));
    CHECK(magnetic_pressure(10) == doctest::Approx(1e-16 / (2 * 4e-7 * M_PI) * 1e9));
    CHECK(magnetic_pressure(10) == doctest::Approx(0.0397887).epsilon(1e-6));
}

TEST_CASE("central differences")
{
    const std::vector<double> d{0, 1, 4, 9};
    const auto g = central_diff_dst(d);
    REQUIRE(g.size() == 4);
    CHECK(g[0] == 1);
    CHECK(g[1] == 2);
    CHECK(g[2] == 4);
    CHECK(g[3] == 5);
    CHECK(central_diff_dst(std::vector<double>{3, 5}) == std::vector<double>{2, 2});
    CHECK_THROWS_AS(central_diff_dst(std::vector<double>{1}), std::invalid_argument);
}

TEST_CASE("derive builds drivers, lag and target")
{
    const auto raw = read("2000-01-01T00:00:00Z,400,-5,5,10,1e5,-10\n"
                          "2000-01-01T01:00:00Z,500,2,-1,20,1e5,-14\n"
                          "2000-01-01T02:00:00Z,600,0,4,0,1e5,-20\n");
    const auto s = derive(raw);
    REQUIRE(s.size() == 3);
    CHECK(s.ey()[0] == doctest::Approx(2.0));
    CHECK(s.pdyn()[1] == 0.0);
    CHECK(s.pb()[2] == 0.0);
    CHECK(s.dst_prev()[0] == -10);
    CHECK(s.dst_prev()[2] == -14);
    CHECK(s.ddst_dt()[0] == -4);
    CHECK(s.ddst_dt()[1] == -5);
    CHECK(s.ddst_dt()[2] == -6);
    CHECK(s.find(parse_timestamp("2000-01-01T01:00:00Z")) == 1);
    CHECK(s.find(parse_timestamp("2000-01-02T01:00:00Z")) == 3);

    const auto f = s.features();
    CHECK(f.rows == 3);
    CHECK(f.columns[static_cast<std::size_t>(Variable::Dst)][1] == -14);
}

TEST_CASE("slice keeps the half-open range")
{
    std::string body;
    for (int h = 0; h < 10; ++h) {
        body += "2000-01-01T0" + std::to_string(h) + ":00:00Z,400,-5,5,10,1e5," + std::to_string(-h) + "\n";
    }
    const auto s = derive(read(body));
    const auto part = slice(s, TimeRange::parse("2000-01-01T02:00:00Z", "2000-01-01T05:00:00Z"));
    REQUIRE(part.size() == 3);
    CHECK(part.dst()[0] == -2);
    CHECK(part.dst()[2] == -4);
}

TEST_CASE("derived CSV round trip")
{
    const auto s = derive(read("2000-01-01T00:00:00Z,400,-5,5,10,1e5,-10\n"
                               "2000-01-01T01:00:00Z,512.3,2.1,3.3,20,1e5,-14\n"));
    std::stringstream buf;
    write_derived_csv(buf, s);
    CHECK(buf.str().substr(0, buf.str().find('\n')) == "timestamp,Ey,Pdyn,PB,Dst,Dst_prev,dDst_dt");
    const auto back = read_derived_csv(buf);
    REQUIRE(back.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(back.time()[i] == s.time()[i]);
        CHECK(back.ey()[i] == s.ey()[i]);
        CHECK(back.pdyn()[i] == s.pdyn()[i]);
        CHECK(back.pb()[i] == s.pb()[i]);
        CHECK(back.ddst_dt()[i] == s.ddst_dt()[i]);
    }
}
