#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "fdel/io.hpp"
#include "fdel/json.hpp"

using fdel::Vector;

namespace {

std::vector<double> parse(const std::string& text) {
    std::istringstream in(text);
    return fdel::read_column(in);
}

std::string error_of(const std::string& text) {
    try {
        (void)parse(text);
    } catch (const fdel::InvalidInput& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("single-column input", "[io]") {
    CHECK(parse("1\n2.5\n-3e-2\n") == std::vector<double>{1.0, 2.5, -0.03});
    CHECK(parse("x\n1\n2\n") == std::vector<double>{1.0, 2.0});
    CHECK(parse("1\r\n2\r\n\n  3  \n") == std::vector<double>{1.0, 2.0, 3.0});
    CHECK(parse("+4\n") == std::vector<double>{4.0});
}

TEST_CASE("input errors name the line", "[io]") {
    CHECK(error_of("1\n2\nabc\n").find("line 3") != std::string::npos);
    CHECK(error_of("1,2\n").find("single column") != std::string::npos);
    CHECK(error_of("1\n2 3\n").find("line 2") != std::string::npos);
    CHECK(error_of("1\nnan\n").find("non-finite") != std::string::npos);
    CHECK(error_of("1\n1,5\n").find("line 2") != std::string::npos);
    CHECK(error_of("header\nother\n").find("line 2") != std::string::npos);
    std::istringstream short_in("1\n2\n");
    CHECK_THROWS_AS(fdel::read_series(short_in), fdel::InvalidInput);
}

TEST_CASE("written columns read back exactly", "[io]") {
    const std::vector<double> v{0.1, -1.0 / 3.0, 1e-300, 12345.678901234567, std::nextafter(1.0, 2.0)};
    std::ostringstream out;
    fdel::write_column(out, v);
    CHECK(parse(out.str()) == v);
}

TEST_CASE("report JSON shape", "[io][json]") {
    fdel::TestReport r;
    r.test = "parameter";
    r.statistic = std::numeric_limits<double>::infinity();
    r.df = 1.0;
    r.p_value = 0.0;
    r.feasible = false;
    r.warnings = {"w"};
    r.estimate = Vector::Constant(1, 0.25);
    r.extras["A_n"] = 2.0;
    const auto j = fdel::to_json(r);
    CHECK(j["statistic"].is_null());
    CHECK(j["df"] == 1.0);
    CHECK(j["reject"] == true);
    CHECK(j["feasible"] == false);
    CHECK(j["variant"] == "plain");
    CHECK(j["warnings"][0] == "w");
    CHECK(j["estimate"][0] == 0.25);
    CHECK(j["extras"]["A_n"] == 2.0);
    const std::vector<std::string> keys{"test", "statistic", "df", "p_value", "level", "reject",
                                        "feasible", "variant", "warnings", "estimate", "extras"};
    std::vector<std::string> got;
    for (const auto& [k, v] : j.items()) got.push_back(k);
    CHECK(got == keys);
}

TEST_CASE("region JSON shape", "[io][json]") {
    fdel::ConfidenceRegion c;
    c.df = 1.0;
    c.cutoff = 3.84;
    c.estimate.theta = Vector::Constant(1, 0.5);
    c.estimate.statistic = -0.0;
    c.intervals = {{0.1, 0.2}, {0.3, 0.6, false, true}};
    const auto j = fdel::to_json(c);
    CHECK(j["endpoints"][0] == 0.1);
    CHECK(j["endpoints"][1] == 0.6);
    CHECK(j["intervals"].size() == 2);
    CHECK(j["intervals"][1]["upper_at_bound"] == true);
    CHECK(j["estimate"]["statistic"].dump() == "0.0");
    CHECK_FALSE(j.contains("grid"));

    fdel::ConfidenceRegion g;
    g.axis0 = {0.0, 1.0};
    g.axis1 = {2.0};
    g.grid = fdel::Matrix::Constant(2, 1, std::numeric_limits<double>::infinity());
    const auto jg = fdel::to_json(g);
    CHECK(jg["endpoints"].empty());
    CHECK(jg["grid"][1][0].is_null());
}
