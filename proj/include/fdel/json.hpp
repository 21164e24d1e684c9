#pragma once

// JSON shapes for reports, estimates and regions. Non-finite numbers
// (an infeasible statistic, an unbounded cutoff) are written as null.

#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "fdel/inference.hpp"

namespace fdel {

using Json = nlohmann::ordered_json;

namespace detail {

inline Json number(double v) { return std::isfinite(v) ? Json(v == 0.0 ? 0.0 : v) : Json(nullptr); }

inline Json numbers(const Vector& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
    return a;
}

inline Json numbers(const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(number(x));
    return a;
}

}  // namespace detail

[[nodiscard]] inline Json to_json(const MeleResult& m) {
    Json j;
    j["theta"] = detail::numbers(m.theta);
    j["statistic"] = detail::number(m.statistic);
    j["variant"] = std::string(to_string(m.variant));
    j["converged"] = m.converged;
    j["evaluations"] = m.evaluations;
    j["multiplier"] = detail::numbers(m.multiplier);
    j["warnings"] = m.warnings;
    return j;
}

[[nodiscard]] inline Json to_json(const TestReport& r) {
    Json j;
    j["test"] = r.test;
    j["statistic"] = detail::number(r.statistic);
    j["df"] = r.df;
    j["p_value"] = r.p_value;
    j["level"] = r.level;
    j["reject"] = r.reject;
    j["feasible"] = r.feasible;
    j["variant"] = std::string(to_string(r.variant));
    j["warnings"] = r.warnings;
    if (r.estimate) j["estimate"] = detail::numbers(*r.estimate);
    Json extras = Json::object();
    for (const auto& [k, v] : r.extras) extras[k] = detail::number(v);
    j["extras"] = extras;
    return j;
}

[[nodiscard]] inline Json to_json(const ParameterTest& t) {
    Json j;
    j["simple"] = to_json(t.simple);
    if (t.ratio) j["ratio"] = to_json(*t.ratio);
    if (t.estimate) j["estimate"] = to_json(*t.estimate);
    return j;
}

[[nodiscard]] inline Json to_json(const RegionInterval& iv) {
    Json j;
    j["lower"] = detail::number(iv.lower);
    j["upper"] = detail::number(iv.upper);
    j["lower_at_bound"] = iv.lower_at_bound;
    j["upper_at_bound"] = iv.upper_at_bound;
    j["lower_at_infeasible"] = iv.lower_at_infeasible;
    j["upper_at_infeasible"] = iv.upper_at_infeasible;
    return j;
}

[[nodiscard]] inline Json to_json(const ConfidenceRegion& c) {
    Json j;
    j["level"] = c.level;
    j["df"] = c.df;
    j["cutoff"] = detail::number(c.cutoff);
    j["estimate"] = to_json(c.estimate);
    if (const auto outer = c.outermost()) {
        j["endpoints"] = Json::array({detail::number(outer->lower), detail::number(outer->upper)});
        Json ivs = Json::array();
        for (const auto& iv : c.intervals) ivs.push_back(to_json(iv));
        j["intervals"] = ivs;
    } else {
        j["endpoints"] = Json::array();
    }
    if (!c.axis0.empty()) {
        j["axis0"] = detail::numbers(c.axis0);
        j["axis1"] = detail::numbers(c.axis1);
        Json rows = Json::array();
        for (Eigen::Index i = 0; i < c.grid.rows(); ++i) rows.push_back(detail::numbers(Vector(c.grid.row(i).transpose())));
        j["grid"] = rows;
    }
    j["warnings"] = c.warnings;
    return j;
}

}  // namespace fdel
