#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include "fdel/montecarlo.hpp"

using Catch::Approx;
using fdel::pi;
using fdel::Vector;

namespace {

fdel::ExperimentSpec ar1_coverage(std::size_t reps, std::uint64_t seed) {
    fdel::ExperimentSpec s;
    s.name = "ar1-lag1";
    s.model = {fdel::Ar1{0.5, 1.0}};
    s.n = 256;
    s.reps = reps;
    s.seed = seed;
    s.procedure.system = "acf:1";
    return s;
}

// Closed-form AR(1) spectral distribution: (2/pi) atan((1+phi)/(1-phi) tan(tau/2)).
double ar1_cdf(double phi, double tau) {
    return 2.0 / pi * std::atan((1.0 + phi) / (1.0 - phi) * std::tan(tau / 2.0));
}

}  // namespace

TEST_CASE("truth_of examples", "[montecarlo]") {
    CHECK(fdel::truth_of({fdel::Ar1{0.5, 1.0}}, "acf:1")[0] == Approx(0.5).epsilon(1e-14));
    const Vector rho = fdel::truth_of({fdel::Ar1{0.5, 2.0}}, "acf:1,2,3");
    CHECK(rho[1] == Approx(0.25).epsilon(1e-14));
    CHECK(rho[2] == Approx(0.125).epsilon(1e-14));
    CHECK(fdel::truth_of({fdel::Farima{{}, 0.3, {}, 1.0}}, "acf:1")[0] == Approx(0.3 / 0.7).epsilon(1e-12));
    // rho(2) = d(d+1)/((1-d)(2-d)) for FARIMA(0,d,0).
    CHECK(fdel::truth_of({fdel::Farima{{}, 0.3, {}, 1.0}}, "acf:2")[0] ==
          Approx(0.3 * 1.3 / (0.7 * 1.7)).epsilon(1e-12));
    const Vector white = fdel::truth_of({fdel::WhiteNoise{3.0}}, "acf:1,4,9");
    CHECK(white.cwiseAbs().maxCoeff() == 0.0);
    CHECK(fdel::truth_of({fdel::Ar1{0.7, 1.0}}, "acf-ar1:2")[0] == Approx(0.7));
}

TEST_CASE("truth_of spectral distribution against closed forms", "[montecarlo]") {
    for (double tau : {0.3, 1.0, 2.5}) {
        CHECK(fdel::truth_of({fdel::WhiteNoise{2.0}}, "cdf:" + std::to_string(tau))[0] ==
              Approx(tau / pi).epsilon(1e-6));
        const Vector v = fdel::truth_of({fdel::Ar1{0.6, 1.0}}, "cdf:0.5," + std::to_string(tau));
        CHECK(v[0] == Approx(ar1_cdf(0.6, 0.5)).epsilon(1e-9));
        CHECK(v[1] == Approx(ar1_cdf(0.6, tau)).epsilon(1e-9));
    }
    // Long memory: the integrable pole at 0 must not break the quadrature.
    const double f = fdel::truth_of({fdel::Farima{{}, 0.4, {}, 1.0}}, "cdf:0.1")[0];
    CHECK(f > 0.1 / pi);
    CHECK(f < 1.0);
}

TEST_CASE("truth_of Whittle parameters", "[montecarlo]") {
    const Vector full = fdel::truth_of({fdel::Ar1{0.4, 2.0}}, "whittle:ar1");
    REQUIRE(full.size() == 2);
    CHECK(full[0] == 2.0);
    CHECK(full[1] == 0.4);
    CHECK(fdel::truth_of({fdel::Farima{{}, 0.2, {}, 1.0}}, "whittle-nf:farima")[0] == 0.2);
    const Vector fgn = fdel::truth_of({fdel::Fgn{0.7, 1.0}}, "whittle:fgn");
    // The Whittle scale of fGn is its innovation variance: exp((1/2pi) int log(2 pi f)) over (-pi, pi).
    boost::math::quadrature::tanh_sinh<double> ts;
    const double v = std::exp(ts.integrate([](double l) { return std::log(fdel::two_pi * fdel::density({fdel::Fgn{0.7, 1.0}}, l)); },
                                           0.0, pi) / pi);
    CHECK(fgn[0] == Approx(v).epsilon(1e-7));
    CHECK(fgn[1] == 0.7);
}

TEST_CASE("truth_of rejects unsupported pairs", "[montecarlo]") {
    CHECK_THROWS_AS(fdel::truth_of({fdel::Ar1{0.5, 1.0}}, "whittle:farima"), fdel::InvalidRequest);
    CHECK_THROWS_AS(fdel::truth_of({fdel::Ar1{0.5, 1.0}}, "gof-composite:ar1"), fdel::InvalidRequest);
    CHECK(fdel::truth_of({fdel::Ar1{0.5, 1.0}}, "portmanteau:3").size() == 0);
}

TEST_CASE("spec invariants are enforced", "[montecarlo]") {
    auto s = ar1_coverage(100, 1);
    s.reps = 99;
    CHECK_THROWS_AS(fdel::Experiment(s), fdel::InvalidInput);
    s.reps = 100;
    s.n = 63;
    CHECK_THROWS_AS(fdel::Experiment(s), fdel::InvalidInput);
    s.n = 64;
    s.procedure.theta0 = Vector::Constant(2, 0.1);
    CHECK_THROWS_AS(fdel::Experiment(s), fdel::InvalidInput);
    s.procedure.theta0.reset();
    s.procedure.kind = fdel::ProcedureKind::moment_validity;
    CHECK_THROWS_AS(fdel::Experiment(s), fdel::InvalidRequest);
}

TEST_CASE("summary arithmetic", "[montecarlo]") {
    const fdel::Experiment exp(ar1_coverage(100, 1));
    std::vector<fdel::ReplicateOutcome> all(100);
    for (auto& o : all) o.event = true, o.statistic = 0.5;
    auto s = fdel::summarize(exp, all);
    CHECK(s.rate == 1.0);
    CHECK(s.se == 0.0);
    CHECK(s.metric == "coverage");

    for (std::size_t i = 0; i < 30; ++i) all[i].event = false;
    all[0].statistic = std::numeric_limits<double>::infinity();
    for (std::size_t i = 95; i < 100; ++i) all[i].failed = true;
    s = fdel::summarize(exp, all);
    CHECK(s.completed == 95);
    CHECK(s.failures == 5);
    CHECK(s.infeasible == 1);
    CHECK(s.rate == 65.0 / 95.0);
    CHECK(s.se == std::sqrt(s.rate * (1.0 - s.rate) / 95.0));
    CHECK(s.statistic.finite == 94);
    CHECK(s.statistic.mean == Approx(0.5));
    CHECK_FALSE(s.degraded);
    all[94].failed = true;
    CHECK(fdel::summarize(exp, all).degraded);
}

TEST_CASE("sample quantiles", "[montecarlo]") {
    std::vector<double> v{1.0, 2.0, 3.0, 4.0, 5.0};
    CHECK(fdel::detail::sorted_quantile(v, 0.5) == 3.0);
    CHECK(fdel::detail::sorted_quantile(v, 0.95) == Approx(4.8));
    v.back() = std::numeric_limits<double>::infinity();
    CHECK(std::isinf(fdel::detail::sorted_quantile(v, 0.95)));
    CHECK(fdel::detail::sorted_quantile(v, 0.5) == 3.0);
}

TEST_CASE("experiments are deterministic and thread-count free", "[montecarlo]") {
    const auto spec = ar1_coverage(100, 42);
    const auto a = fdel::run_experiment(spec, 1);
    const auto b = fdel::run_experiment(spec, 3);
    CHECK(fdel::to_json(a).dump() == fdel::to_json(b).dump());
    CHECK(a.statistics == b.statistics);
    auto other = spec;
    other.seed = 43;
    CHECK(fdel::run_experiment(other, 1).statistics != a.statistics);
    CHECK_FALSE(fdel::to_json(a).contains("wall_seconds"));
    CHECK(fdel::to_json(a, true).contains("wall_seconds"));
}

TEST_CASE("summary is invariant under permutation of replicate seeds", "[montecarlo]") {
    const auto spec = ar1_coverage(100, 5);
    const fdel::Experiment exp(spec);
    std::vector<std::uint64_t> seeds(spec.reps);
    for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = fdel::detail::stream_seed(spec.seed, i);
    auto run = [&](const std::vector<std::uint64_t>& order) {
        std::vector<fdel::ReplicateOutcome> out;
        for (auto s : order) out.push_back(exp.replicate(s));
        return fdel::summarize(exp, out);
    };
    const auto base = run(seeds);
    auto shuffled = seeds;
    std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(9));
    const auto perm = run(shuffled);
    CHECK(perm.rate == base.rate);
    CHECK(perm.statistic.median == base.statistic.median);
    CHECK(perm.statistic.q95 == base.statistic.q95);
    CHECK(perm.statistic.mean == Approx(base.statistic.mean).epsilon(1e-12));
    CHECK(perm.infeasible == base.infeasible);
}

TEST_CASE("small coverage run is near nominal", "[montecarlo]") {
    const auto s = fdel::run_experiment(ar1_coverage(300, 11), 1);
    CHECK(s.failures == 0);
    CHECK(s.rate > 0.88);
    CHECK(s.rate < 0.99);
    CHECK(s.theta0[0] == 0.5);
}

TEST_CASE("procedures of every kind run", "[montecarlo]") {
    fdel::ExperimentSpec s;
    s.model = {fdel::WhiteNoise{1.0}};
    s.n = 128;
    s.reps = 100;
    s.procedure.kind = fdel::ProcedureKind::gof_simple;
    auto g = fdel::run_experiment(s, 1);
    CHECK(g.metric == "rejection");
    CHECK(g.system == "gof:white(1)");
    CHECK(g.rate < 0.2);

    s.procedure.f0 = fdel::SpectralModel{fdel::WhiteNoise{2.0}};
    CHECK(fdel::run_experiment(s, 1).rate > g.rate);

    s.model = {fdel::Ar1{0.5, 1.0}};
    s.procedure = {};
    s.procedure.kind = fdel::ProcedureKind::moment_validity;
    s.procedure.system = "acf-ar1:2";
    CHECK(fdel::run_experiment(s, 1).failures == 0);

    s.procedure = {};
    s.procedure.system = "acf:1";
    s.procedure.ratio_form = true;
    CHECK(fdel::run_experiment(s, 1).rate > 0.85);

    s.innovations = fdel::InnovationKind::chi_square;
    s.procedure.ratio_form = false;
    CHECK(fdel::run_experiment(s, 1).completed == 100);
}

TEST_CASE("config parsing", "[montecarlo][config]") {
    std::istringstream text(R"(# defaults for every section
n = 256
reps = 200
; property_tree style comment
[coverage]
model = ar1(0.5,1)
system = acf:1
seed = 7

[size]
model = ar1(0.5)
procedure = moment
system = acf-ar1:2
level = 0.95
lower = -0.9
upper = 0.9

[composite]
model = ar1(0.5)
procedure = gof-composite
family = ar1
n = 512
)");
    const auto specs = fdel::parse_experiments(text);
    REQUIRE(specs.size() == 3);
    CHECK(specs[0].name == "coverage");
    CHECK(specs[0].n == 256);
    CHECK(specs[0].reps == 200);
    CHECK(specs[0].seed == 7);
    CHECK(specs[1].procedure.kind == fdel::ProcedureKind::moment_validity);
    CHECK((*specs[1].procedure.search.lower)[0] == -0.9);
    CHECK(specs[2].n == 512);
    CHECK(specs[2].procedure.family == "ar1");

    std::istringstream empty("");
    CHECK(fdel::parse_experiments(empty).empty());

    auto rejects = [](const char* cfg) {
        std::istringstream in(cfg);
        CHECK_THROWS_AS(fdel::parse_experiments(in), fdel::ConfigurationError);
    };
    rejects("[broken\nmodel = white\n");
    rejects("[a]\nmodel = white\nsystem = acf:1\ncolour = red\n");
    rejects("[a]\nsystem = acf:1\n");
    rejects("[a]\nmodel = white\n");
    rejects("[a]\nmodel = notamodel\nsystem = acf:1\n");
    rejects("[a]\nmodel = white\nsystem = acf:1\nn = 12.5\n");
    rejects("[a]\nmodel = white\nprocedure = gof-composite\n");
}
