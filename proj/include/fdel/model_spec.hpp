#pragma once

/** @file
 * Text grammar for spectral models, shared by the CLI and experiment configs.
 *
 *     white(var)                      white:var is accepted as well
 *     ar1(phi,var)
 *     arma(p,q;ar_1..ar_p;ma_1..ma_q;var)
 *     farima(p,d,q;ar_1..ar_p;ma_1..ma_q;var)
 *     fgn(H,var)
 *
 * A trailing variance may be written `var=v` and defaults to 1 when omitted.
 * In arma/farima, coefficient groups for a zero order may be left out.
 */

#include <cctype>
#include <charconv>
#include <cstddef>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fdel/error.hpp"
#include "fdel/models.hpp"

namespace fdel {

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline double parse_number(std::string_view s, std::string_view context) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
        throw InvalidInput("expected a number in '" + std::string(context) + "', got '" +
                           std::string(s) + "'");
    return v;
}

inline std::vector<double> parse_numbers(std::string_view s, std::string_view context) {
    std::vector<double> out;
    if (trim(s).empty()) return out;
    for (auto part : split(s, ',')) out.push_back(parse_number(part, context));
    return out;
}

inline std::size_t parse_order(double v, std::string_view context) {
    if (v < 0.0 || v != static_cast<double>(static_cast<std::size_t>(v)))
        throw InvalidInput("model order must be a nonnegative integer in '" + std::string(context) + "'");
    return static_cast<std::size_t>(v);
}

inline double parse_variance(std::string_view s, std::string_view context) {
    s = trim(s);
    if (s.starts_with("var=")) s.remove_prefix(4);
    return parse_number(s, context);
}

/// Coefficient groups and the variance after the "p,d,q" or "p,q" header.
inline void parse_arma_tail(std::vector<std::string_view> parts, std::size_t p, std::size_t q,
                            std::vector<double>& ar, std::vector<double>& ma, double& variance,
                            std::string_view context) {
    variance = 1.0;
    const std::size_t groups = (p > 0 ? 1 : 0) + (q > 0 ? 1 : 0);
    if (!parts.empty() && (parts.back().starts_with("var=") || parts.size() > groups)) {
        variance = parse_variance(parts.back(), context);
        parts.pop_back();
    }
    // Explicit empty groups for zero orders are allowed.
    std::vector<std::string_view> filled;
    std::size_t empties = 0;
    for (auto part : parts) {
        if (part.empty())
            ++empties;
        else
            filled.push_back(part);
    }
    if (filled.size() != groups || (empties > 0 && filled.size() + empties != 2))
        throw InvalidInput("coefficient groups do not match the model orders in '" +
                           std::string(context) + "'");
    std::size_t next = 0;
    if (p > 0) ar = parse_numbers(filled[next++], context);
    if (q > 0) ma = parse_numbers(filled[next++], context);
    if (ar.size() != p || ma.size() != q)
        throw InvalidInput("coefficient count does not match the model orders in '" +
                           std::string(context) + "'");
}

}  // namespace detail

/// Parse a model description; the result is validated.
[[nodiscard]] inline SpectralModel parse_model(std::string_view text) {
    const std::string_view spec = detail::trim(text);
    std::string_view name, args;
    if (const auto open = spec.find('('); open != std::string_view::npos) {
        if (spec.back() != ')') throw InvalidInput("unbalanced parentheses in model '" + std::string(spec) + "'");
        name = detail::trim(spec.substr(0, open));
        args = spec.substr(open + 1, spec.size() - open - 2);
    } else if (const auto colon = spec.find(':'); colon != std::string_view::npos) {
        name = detail::trim(spec.substr(0, colon));
        args = spec.substr(colon + 1);
    } else {
        name = spec;
    }

    SpectralModel model;
    if (name == "white") {
        model.kind = WhiteNoise{args.empty() ? 1.0 : detail::parse_variance(args, spec)};
    } else if (name == "ar1") {
        const auto parts = detail::split(args, ',');
        if (parts.empty() || parts.size() > 2) throw InvalidInput("ar1 expects (phi[,var])");
        model.kind = Ar1{detail::parse_number(parts[0], spec),
                         parts.size() == 2 ? detail::parse_variance(parts[1], spec) : 1.0};
    } else if (name == "fgn") {
        const auto parts = detail::split(args, ',');
        if (parts.empty() || parts.size() > 2) throw InvalidInput("fgn expects (H[,var])");
        model.kind = Fgn{detail::parse_number(parts[0], spec),
                         parts.size() == 2 ? detail::parse_variance(parts[1], spec) : 1.0};
    } else if (name == "arma" || name == "farima") {
        auto groups = detail::split(args, ';');
        const auto header = detail::parse_numbers(groups.front(), spec);
        groups.erase(groups.begin());
        if (name == "arma") {
            if (header.size() != 2) throw InvalidInput("arma expects (p,q;...)");
            Arma m;
            detail::parse_arma_tail(groups, detail::parse_order(header[0], spec),
                                    detail::parse_order(header[1], spec), m.ar, m.ma, m.variance, spec);
            model.kind = std::move(m);
        } else {
            if (header.size() != 3) throw InvalidInput("farima expects (p,d,q;...)");
            Farima m;
            m.d = header[1];
            detail::parse_arma_tail(groups, detail::parse_order(header[0], spec),
                                    detail::parse_order(header[2], spec), m.ar, m.ma, m.variance, spec);
            model.kind = std::move(m);
        }
    } else {
        throw InvalidInput("unknown model '" + std::string(name) + "'");
    }
    validate(model);
    return model;
}

/// Canonical text form; parse_model(describe(m)) reproduces m.
[[nodiscard]] inline std::string describe(const SpectralModel& model) {
    std::ostringstream os;
    os.precision(17);
    auto list = [&os](const std::vector<double>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    };
    std::visit(detail::overloaded{
                   [&](const WhiteNoise& m) { os << "white(" << m.variance << ")"; },
                   [&](const Ar1& m) { os << "ar1(" << m.phi << "," << m.variance << ")"; },
                   [&](const Arma& m) {
                       os << "arma(" << m.ar.size() << "," << m.ma.size() << ";";
                       list(m.ar);
                       os << ";";
                       list(m.ma);
                       os << ";var=" << m.variance << ")";
                   },
                   [&](const Farima& m) {
                       os << "farima(" << m.ar.size() << "," << m.d << "," << m.ma.size() << ";";
                       list(m.ar);
                       os << ";";
                       list(m.ma);
                       os << ";var=" << m.variance << ")";
                   },
                   [&](const Fgn& m) { os << "fgn(" << m.hurst << "," << m.variance << ")"; }},
               model.kind);
    return os.str();
}

}  // namespace fdel
