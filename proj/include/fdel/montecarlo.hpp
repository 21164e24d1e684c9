#pragma once

// Replication harness: empirical coverage, size and power of the EL
// procedures. Replicate i draws its path from stream_seed(seed, i), so the
// result does not depend on the number of worker threads.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "fdel/detail/random.hpp"
#include "fdel/error.hpp"
#include "fdel/estimating.hpp"
#include "fdel/inference.hpp"
#include "fdel/json.hpp"
#include "fdel/model_spec.hpp"
#include "fdel/models.hpp"

namespace fdel {

enum class ProcedureKind { parameter, moment_validity, gof_simple, gof_composite };

[[nodiscard]] inline std::string_view to_string(ProcedureKind k) noexcept {
    switch (k) {
        case ProcedureKind::parameter: return "parameter";
        case ProcedureKind::moment_validity: return "moment";
        case ProcedureKind::gof_simple: return "gof";
        case ProcedureKind::gof_composite: return "gof-composite";
    }
    return "?";
}

[[nodiscard]] inline ProcedureKind parse_procedure(std::string_view s) {
    if (s == "parameter") return ProcedureKind::parameter;
    if (s == "moment") return ProcedureKind::moment_validity;
    if (s == "gof") return ProcedureKind::gof_simple;
    if (s == "gof-composite") return ProcedureKind::gof_composite;
    throw InvalidInput("unknown procedure '" + std::string(s) + "' (parameter, moment, gof, gof-composite)");
}

/// The inference operation run on every replicate.
struct Procedure {
    ProcedureKind kind = ProcedureKind::parameter;
    /// System grammar (parameter, moment).
    std::string system;
    std::optional<Variant> variant;
    /// Hypothesized value; defaults to truth_of(model, system).
    std::optional<Vector> theta0;
    /// Parameter test in likelihood-ratio form instead of l(theta0) against chi^2_r.
    bool ratio_form = false;
    /// Null density for the simple GOF test; defaults to the data model.
    std::optional<SpectralModel> f0;
    /// Whittle family for the composite GOF test.
    std::string family;
    SearchOptions search;
};

struct ExperimentSpec {
    std::string name = "experiment";
    SpectralModel model;
    std::size_t n = 512;
    std::size_t reps = 1000;
    Procedure procedure;
    double level = 0.95;
    std::uint64_t seed = 1;
    /// Chi-square innovations through the MA representation instead of exact Gaussian paths.
    InnovationKind innovations = InnovationKind::gaussian;
};

struct StatisticSummary {
    double mean = std::numeric_limits<double>::quiet_NaN();
    double variance = std::numeric_limits<double>::quiet_NaN();
    /// Order statistics include infinite values (infeasible replicates).
    double median = std::numeric_limits<double>::quiet_NaN();
    double q95 = std::numeric_limits<double>::quiet_NaN();
    std::size_t finite = 0;
};

struct ExperimentSummary {
    std::string name;
    std::string model;
    std::string procedure;
    std::string system;
    std::size_t n = 0;
    std::size_t reps = 0;
    std::uint64_t seed = 0;
    double level = 0.95;
    /// "coverage" for parameter tests, "rejection" otherwise.
    std::string metric;
    Vector theta0;
    double rate = 0.0;
    double se = 0.0;
    std::size_t completed = 0;
    /// Replicates that raised a numerical failure; excluded from the rate.
    std::size_t failures = 0;
    /// Replicates whose statistic is +inf (zero outside the hull); counted as miss/reject.
    std::size_t infeasible = 0;
    StatisticSummary statistic;
    bool degraded = false;
    double wall_seconds = 0.0;
    /// Per-replicate statistics in replicate order (NaN for failures).
    std::vector<double> statistics;
};

struct ReplicateOutcome {
    bool failed = false;
    double statistic = std::numeric_limits<double>::quiet_NaN();
    /// Covered (coverage metric) or rejected (rejection metric).
    bool event = false;
    std::string error;
};

/// Normalized spectral distribution F(tau)/F(pi) with F(tau) = int_0^tau f.
[[nodiscard]] inline double normalized_spectral_cdf(const SpectralModel& model, double tau) {
    if (!(tau > 0.0 && tau <= pi)) throw InvalidInput("tau must lie in (0, pi]");
    boost::math::quadrature::tanh_sinh<double> ts;
    auto f = [&](double l) { return density(model, l); };
    const double total = ts.integrate(f, 0.0, pi);
    return tau == pi ? 1.0 : ts.integrate(f, 0.0, tau) / total;
}

/// True parameter of a system (grammar string) under a model.
[[nodiscard]] inline Vector truth_of(const SpectralModel& model, std::string_view system) {
    validate(model);
    const auto spec = detail::trim(system);
    const auto colon = spec.find(':');
    const auto kind = detail::trim(spec.substr(0, colon));
    const auto args = colon == std::string_view::npos ? std::string_view{} : detail::trim(spec.substr(colon + 1));
    auto rho = [&](int lag) {
        const auto r = autocovariance(model, static_cast<std::size_t>(lag));
        return r.values[static_cast<std::size_t>(lag)] / r.values[0];
    };

    if (kind == "acf") {
        const auto lags = detail::parse_numbers(args, spec);
        Vector out(static_cast<Eigen::Index>(lags.size()));
        for (std::size_t i = 0; i < lags.size(); ++i) out[static_cast<Eigen::Index>(i)] = rho(static_cast<int>(lags[i]));
        return out;
    }
    if (kind == "acf-ar1") return Vector::Constant(1, rho(1));
    if (kind == "cdf") {
        const auto taus = detail::parse_numbers(args, spec);
        Vector out(static_cast<Eigen::Index>(taus.size()));
        for (std::size_t i = 0; i < taus.size(); ++i)
            out[static_cast<Eigen::Index>(i)] = normalized_spectral_cdf(model, taus[i]);
        return out;
    }
    if (kind == "gof" || kind == "portmanteau") return Vector(0);
    if (kind == "whittle" || kind == "whittle-nf") {
        const std::string fam(args);
        std::optional<Vector> full;
        if (const auto* w = std::get_if<WhiteNoise>(&model.kind); w && fam == "white") {
            full = Vector::Constant(1, w->variance);
        } else if (const auto* a = std::get_if<Ar1>(&model.kind); a && fam == "ar1") {
            full = Vector(2);
            (*full) << a->variance, a->phi;
        } else if (const auto* f = std::get_if<Farima>(&model.kind);
                   f && fam == "farima" && f->ar.empty() && f->ma.empty()) {
            full = Vector(2);
            (*full) << f->variance, f->d;
        } else if (const auto* g = std::get_if<Fgn>(&model.kind); g && fam == "fgn") {
            full = Vector(2);
            (*full) << g->variance * detail::fgn_innovation_scale(g->hurst).variance, g->hurst;
        }
        if (full) return kind == "whittle" ? *full : Vector(full->tail(full->size() - 1));
    }
    throw InvalidRequest("no true parameter for system '" + std::string(spec) + "' under model " + describe(model));
}

/// A validated experiment with its sampler and system built once.
class Experiment {
public:
    explicit Experiment(ExperimentSpec spec) : spec_(std::move(spec)) {
        if (spec_.n < 64) throw InvalidInput("experiment '" + spec_.name + "': n must be >= 64");
        if (spec_.reps < 100) throw InvalidInput("experiment '" + spec_.name + "': reps must be >= 100");
        if (!(spec_.level > 0.0 && spec_.level < 1.0))
            throw InvalidInput("experiment '" + spec_.name + "': level must lie in (0, 1)");
        validate(spec_.model);
        if (spec_.innovations == InnovationKind::gaussian) {
            sampler_.emplace(spec_.model, spec_.n);
        } else {
            ma_ = ma_weights(spec_.model, 4 * spec_.n);
            innovation_ = InnovationSpec{innovation_variance(spec_.model), spec_.innovations};
        }

        auto& proc = spec_.procedure;
        switch (proc.kind) {
            case ProcedureKind::parameter:
            case ProcedureKind::moment_validity: {
                system_ = parse_system(proc.system);
                variant_ = proc.variant.value_or(natural_variant(*system_));
                if (proc.kind == ProcedureKind::parameter) {
                    theta0_ = proc.theta0 ? *proc.theta0 : truth_of(spec_.model, proc.system);
                    if (static_cast<std::size_t>(theta0_.size()) != system_->p)
                        throw InvalidInput("experiment '" + spec_.name + "': theta needs " +
                                           std::to_string(system_->p) + " entries");
                    if (!system_->is_admissible(theta0_))
                        throw InvalidInput("experiment '" + spec_.name + "': theta lies outside the parameter space");
                } else if (system_->r <= system_->p) {
                    throw InvalidRequest("experiment '" + spec_.name + "': moment test needs r > p");
                }
                break;
            }
            case ProcedureKind::gof_simple:
                if (!proc.f0) proc.f0 = spec_.model;
                validate(*proc.f0);
                proc.system = "gof:" + describe(*proc.f0);
                break;
            case ProcedureKind::gof_composite:
                family_ = whittle_family(proc.family);
                proc.system = "gof-composite:" + proc.family;
                break;
        }
    }

    [[nodiscard]] const ExperimentSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] const Vector& theta0() const noexcept { return theta0_; }
    [[nodiscard]] std::string metric() const {
        return spec_.procedure.kind == ProcedureKind::parameter ? "coverage" : "rejection";
    }

    [[nodiscard]] TimeSeries simulate(std::uint64_t seed) const {
        if (sampler_) return sampler_->sample(seed);
        return simulate_linear(ma_, innovation_, spec_.n, seed);
    }

    /// One replicate from an explicit path seed.
    [[nodiscard]] ReplicateOutcome replicate(std::uint64_t seed) const {
        ReplicateOutcome out;
        try {
            const auto pg = periodogram(simulate(seed));
            const auto& proc = spec_.procedure;
            TestReport rep;
            switch (proc.kind) {
                case ProcedureKind::parameter: {
                    auto t = test_parameter_form(pg);
                    rep = std::move(t);
                    break;
                }
                case ProcedureKind::moment_validity:
                    rep = test_moment_validity(*system_, pg, variant_, spec_.level, proc.search);
                    break;
                case ProcedureKind::gof_simple:
                    rep = test_gof_simple(*proc.f0, pg, spec_.level, proc.search.el);
                    break;
                case ProcedureKind::gof_composite:
                    rep = test_gof_composite(*family_, pg, spec_.level, proc.search);
                    break;
            }
            out.statistic = rep.statistic;
            out.event = proc.kind == ProcedureKind::parameter ? !rep.reject : rep.reject;
        } catch (const NumericalFailure& e) {
            out.failed = true;
            out.error = e.what();
        } catch (const EstimationFailure& e) {
            out.failed = true;
            out.error = e.what();
        }
        return out;
    }

private:
    TestReport test_parameter_form(const Periodogram& pg) const {
        const auto& proc = spec_.procedure;
        if (!proc.ratio_form) {
            const auto stat = log_el_ratio(*system_, theta0_, pg, variant_, proc.search.el);
            return detail::make_report("parameter", stat.value, static_cast<double>(system_->r), spec_.level,
                                       variant_, *system_);
        }
        auto t = test_parameter(*system_, pg, variant_, theta0_, spec_.level, proc.search);
        if (!t.ratio) throw InvalidRequest("ratio form needs p >= 1");
        return *t.ratio;
    }

    ExperimentSpec spec_;
    std::optional<GaussianSampler> sampler_;
    std::vector<double> ma_;
    InnovationSpec innovation_;
    std::optional<EstimatingSystem> system_;
    std::optional<WhittleFamily> family_;
    Variant variant_ = Variant::plain;
    Vector theta0_ = Vector(0);
};

namespace detail {

/// Type-7 sample quantile of sorted values (infinite entries allowed).
inline double sorted_quantile(const std::vector<double>& v, double prob) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double h = prob * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    if (v[lo] == v[hi] || std::isinf(v[hi])) return h == static_cast<double>(lo) ? v[lo] : v[hi];
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace detail

/// Aggregate replicate outcomes (order-free apart from the stored statistics vector).
[[nodiscard]] inline ExperimentSummary summarize(const Experiment& exp, std::span<const ReplicateOutcome> outcomes) {
    const auto& spec = exp.spec();
    ExperimentSummary s;
    s.name = spec.name;
    s.model = describe(spec.model);
    s.procedure = std::string(to_string(spec.procedure.kind));
    s.system = spec.procedure.system;
    s.n = spec.n;
    s.reps = outcomes.size();
    s.seed = spec.seed;
    s.level = spec.level;
    s.metric = exp.metric();
    s.theta0 = exp.theta0();

    std::size_t events = 0;
    std::vector<double> completed;
    double sum = 0.0;
    for (const auto& o : outcomes) {
        s.statistics.push_back(o.failed ? std::numeric_limits<double>::quiet_NaN() : o.statistic);
        if (o.failed) {
            ++s.failures;
            continue;
        }
        completed.push_back(o.statistic);
        if (o.event) ++events;
        if (std::isinf(o.statistic)) {
            ++s.infeasible;
        } else {
            ++s.statistic.finite;
            sum += o.statistic;
        }
    }
    s.completed = completed.size();
    if (s.completed > 0) {
        s.rate = static_cast<double>(events) / static_cast<double>(s.completed);
        s.se = std::sqrt(s.rate * (1.0 - s.rate) / static_cast<double>(s.completed));
        std::sort(completed.begin(), completed.end());
        s.statistic.median = detail::sorted_quantile(completed, 0.5);
        s.statistic.q95 = detail::sorted_quantile(completed, 0.95);
    }
    if (s.statistic.finite > 0) {
        s.statistic.mean = sum / static_cast<double>(s.statistic.finite);
        double ss = 0.0;
        for (double v : completed)
            if (std::isfinite(v)) ss += (v - s.statistic.mean) * (v - s.statistic.mean);
        s.statistic.variance = s.statistic.finite > 1 ? ss / static_cast<double>(s.statistic.finite - 1) : 0.0;
    }
    s.degraded = static_cast<double>(s.failures) > 0.05 * static_cast<double>(s.reps);
    return s;
}

/// Run every replicate on `threads` workers (0: hardware concurrency).
[[nodiscard]] inline ExperimentSummary run_experiment(const ExperimentSpec& spec, unsigned threads = 0) {
    const auto started = std::chrono::steady_clock::now();
    const Experiment exp(spec);
    std::vector<ReplicateOutcome> outcomes(spec.reps);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < spec.reps;) {
            try {
                outcomes[i] = exp.replicate(detail::stream_seed(spec.seed, i));
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = spec.reps;
            }
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, spec.reps));
    if (threads <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned k = 0; k < threads; ++k) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
    auto s = summarize(exp, outcomes);
    s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return s;
}

/// JSON line for a summary; wall-clock only on request so reruns stay byte-identical.
[[nodiscard]] inline Json to_json(const ExperimentSummary& s, bool include_timing = false) {
    Json j;
    j["name"] = s.name;
    j["model"] = s.model;
    j["procedure"] = s.procedure;
    j["system"] = s.system;
    j["n"] = s.n;
    j["reps"] = s.reps;
    j["seed"] = s.seed;
    j["level"] = s.level;
    j["theta0"] = detail::numbers(s.theta0);
    j["metric"] = s.metric;
    j["rate"] = s.rate;
    j["se"] = s.se;
    j["completed"] = s.completed;
    j["failures"] = s.failures;
    j["infeasible"] = s.infeasible;
    j["statistic"] = Json{{"mean", detail::number(s.statistic.mean)},
                          {"variance", detail::number(s.statistic.variance)},
                          {"median", detail::number(s.statistic.median)},
                          {"q95", detail::number(s.statistic.q95)},
                          {"finite", s.statistic.finite}};
    j["degraded"] = s.degraded;
    if (include_timing) j["wall_seconds"] = s.wall_seconds;
    return j;
}

namespace detail {

inline Vector parse_vector(std::string_view s, std::string_view context) {
    const auto v = parse_numbers(s, context);
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace detail

/** Read experiments from INI text. Each [section] is one experiment; keys
 * before the first section are defaults for every section. Comments start
 * with ';' or '#'.
 *
 *     model = ar1(0.5,1)     data model (model grammar)
 *     n = 512                reps = 1000         seed = 1      level = 0.95
 *     procedure = parameter  (moment, gof, gof-composite)
 *     system = acf:1         variant = plain     theta = 0.5   form = simple|ratio
 *     f0 = white(2)          family = ar1        lower = ...   upper = ...
 *     innovations = gaussian|chi2
 */
[[nodiscard]] inline std::vector<ExperimentSpec> parse_experiments(std::istream& in) {
    // property_tree only knows ';' comments.
    std::stringstream text;
    for (std::string line; std::getline(in, line);) {
        const auto first = line.find_first_not_of(" \t");
        text << (first != std::string::npos && line[first] == '#' ? "" : line) << '\n';
    }
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(text, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigurationError("config line " + std::to_string(e.line()) + ": " + e.message());
    }

    std::map<std::string, std::string> defaults;
    for (const auto& [key, node] : tree) {
        if (!node.empty()) continue;
        if (node.data().empty()) throw ConfigurationError("'" + key + "' is an empty section or an empty value");
        defaults[key] = node.data();
    }

    std::vector<ExperimentSpec> out;
    for (const auto& [section, node] : tree) {
        if (node.empty()) continue;
        auto values = defaults;
        for (const auto& [key, v] : node) values[key] = v.data();
        auto get = [&](const std::string& key) -> std::optional<std::string> {
            const auto it = values.find(key);
            return it == values.end() ? std::nullopt : std::optional<std::string>(it->second);
        };
        auto fail = [&](const std::string& msg) { return ConfigurationError("[" + section + "]: " + msg); };
        static const std::vector<std::string> known = {"model", "n", "reps", "seed", "level", "procedure",
                                                       "system", "variant", "theta", "form", "f0", "family",
                                                       "lower", "upper", "innovations"};
        for (const auto& [key, v] : values)
            if (std::find(known.begin(), known.end(), key) == known.end()) throw fail("unknown key '" + key + "'");

        try {
            ExperimentSpec spec;
            spec.name = section;
            const auto model = get("model");
            if (!model) throw fail("missing key 'model'");
            spec.model = parse_model(*model);
            auto whole = [&](const std::string& key, std::uint64_t fallback) {
                const auto v = get(key);
                if (!v) return fallback;
                const double x = detail::parse_number(*v, key);
                if (x < 0.0 || x != std::floor(x)) throw fail("'" + key + "' must be a nonnegative integer");
                return static_cast<std::uint64_t>(x);
            };
            spec.n = whole("n", spec.n);
            spec.reps = whole("reps", spec.reps);
            spec.seed = whole("seed", spec.seed);
            if (const auto v = get("level")) spec.level = detail::parse_number(*v, "level");

            auto& proc = spec.procedure;
            proc.kind = parse_procedure(get("procedure").value_or("parameter"));
            proc.system = get("system").value_or("");
            if ((proc.kind == ProcedureKind::parameter || proc.kind == ProcedureKind::moment_validity) &&
                proc.system.empty())
                throw fail("missing key 'system'");
            if (const auto v = get("variant")) proc.variant = parse_variant(*v);
            if (const auto v = get("theta")) proc.theta0 = detail::parse_vector(*v, "theta");
            if (const auto v = get("form")) {
                if (*v != "simple" && *v != "ratio") throw fail("form must be simple or ratio");
                proc.ratio_form = *v == "ratio";
            }
            if (const auto v = get("f0")) proc.f0 = parse_model(*v);
            proc.family = get("family").value_or("");
            if (proc.kind == ProcedureKind::gof_composite && proc.family.empty()) throw fail("missing key 'family'");
            if (const auto v = get("lower")) proc.search.lower = detail::parse_vector(*v, "lower");
            if (const auto v = get("upper")) proc.search.upper = detail::parse_vector(*v, "upper");
            if (const auto v = get("innovations")) {
                if (*v == "gaussian") spec.innovations = InnovationKind::gaussian;
                else if (*v == "chi2") spec.innovations = InnovationKind::chi_square;
                else throw fail("innovations must be gaussian or chi2");
            }
            out.push_back(std::move(spec));
        } catch (const ConfigurationError&) {
            throw;
        } catch (const std::invalid_argument& e) {
            throw fail(e.what());
        }
    }
    return out;
}

}  // namespace fdel
