// fdel: frequency-domain empirical likelihood from the command line.
//
// Exit codes: 0 success, 2 invalid input or configuration, 3 numerical
// failure (including a degraded experiment).

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fdel/fdel.hpp"

namespace {

constexpr int exit_input = 2;
constexpr int exit_numerical = 3;

class Output {
public:
    explicit Output(const std::string& path) {
        if (path.empty() || path == "-") return;
        file_.open(path, std::ios::binary);
        if (!file_) throw fdel::InvalidInput("cannot open output file '" + path + "'");
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

fdel::TimeSeries load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw fdel::InvalidInput("cannot read input file '" + path + "'");
    try {
        return fdel::read_series(in);
    } catch (const fdel::InvalidInput& e) {
        throw fdel::InvalidInput(path + ": " + e.what());
    }
}

fdel::Vector parse_list(const std::string& text, const char* what) {
    const auto v = fdel::detail::parse_numbers(text, what);
    return Eigen::Map<const fdel::Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// "lo,hi" per parameter, parameters separated by ';'.
void apply_bounds(const std::string& text, fdel::SearchOptions& opt) {
    if (text.empty()) return;
    const auto pairs = fdel::detail::split(text, ';');
    fdel::Vector lo(static_cast<Eigen::Index>(pairs.size())), hi(lo.size());
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto v = fdel::detail::parse_numbers(pairs[k], "bounds");
        if (v.size() != 2 || !(v[0] < v[1])) throw fdel::InvalidInput("bounds must be lo,hi pairs with lo < hi");
        lo[static_cast<Eigen::Index>(k)] = v[0];
        hi[static_cast<Eigen::Index>(k)] = v[1];
    }
    opt.lower = lo;
    opt.upper = hi;
}

void write_json(const fdel::Json& j, const std::string& out) {
    Output o(out);
    o.stream() << j.dump(2) << '\n';
}

struct Common {
    std::string input;
    std::string output;
    std::string system;
    std::string variant;
    std::string bounds;
    double level = 0.95;
};

fdel::Variant variant_for(const Common& c, const fdel::EstimatingSystem& s) {
    return c.variant.empty() ? fdel::natural_variant(s) : fdel::parse_variant(c.variant);
}

int run(int argc, char** argv) {
    CLI::App app{"Frequency-domain empirical likelihood inference for stationary time series"};
    app.require_subcommand(1);

    Common c;
    auto data_options = [&c](CLI::App* cmd, bool needs_system) {
        cmd->add_option("--in", c.input, "Single-column data file")->required();
        cmd->add_option("--out", c.output, "Output file (default stdout)");
        cmd->add_option("--level", c.level, "Confidence level 1 - gamma")->capture_default_str();
        if (needs_system) {
            cmd->add_option("--system", c.system, "Estimating system, e.g. acf:1, whittle-nf:ar1")->required();
            cmd->add_option("--variant", c.variant, "plain, mean_corrected or squared_moment");
            cmd->add_option("--bounds", c.bounds, "Search box: lo,hi per parameter, ';' between parameters");
        }
    };

    std::string theta;
    auto* analyze = app.add_subcommand("analyze", "Parameter test, or overidentification test without --theta");
    data_options(analyze, true);
    analyze->add_option("--theta", theta, "Hypothesized parameter, comma separated");

    auto* mele_cmd = app.add_subcommand("mele", "Maximum empirical likelihood estimate");
    data_options(mele_cmd, true);

    int resolution = 201;
    auto* region = app.add_subcommand("region", "Confidence interval (p = 1) or grid region (p = 2)");
    data_options(region, true);
    region->add_option("--resolution", resolution, "Scan points per axis")->capture_default_str();

    std::string f0, family;
    auto* gof = app.add_subcommand("gof", "Goodness of fit against a density (--f0) or a family (--family)");
    data_options(gof, false);
    auto* f0_opt = gof->add_option("--f0", f0, "Null spectral model, e.g. white(1)");
    auto* family_opt = gof->add_option("--family", family, "Whittle family: white, ar1, farima, fgn");
    f0_opt->excludes(family_opt);
    gof->add_option("--bounds", c.bounds, "Search box for --family");

    std::string model, innovations = "gaussian";
    std::size_t n = 0;
    std::uint64_t seed = 0;
    auto* simulate = app.add_subcommand("simulate", "Simulate a stationary series");
    simulate->add_option("--model", model, "Model, e.g. ar1(0.5,1), farima(0,0.3,0;var=1), fgn(0.7,1)")->required();
    simulate->add_option("--n", n, "Length")->required();
    simulate->add_option("--seed", seed, "Seed")->required();
    simulate->add_option("--innovations", innovations, "gaussian (exact) or chi2 (linear filter)")
        ->check(CLI::IsMember({"gaussian", "chi2"}));
    simulate->add_option("--out", c.output, "Output file (default stdout)");

    std::string config;
    unsigned threads = 0;
    bool timing = false;
    auto* experiment = app.add_subcommand("experiment", "Run Monte Carlo experiments from a config file");
    experiment->add_option("--config", config, "INI experiment file")->required();
    experiment->add_option("--out", c.output, "JSON-lines output (default stdout)");
    experiment->add_option("--threads", threads, "Worker threads (0: all cores)")->capture_default_str();
    experiment->add_flag("--timing", timing, "Add wall_seconds to each line");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_input;
    }

    if (*simulate) {
        const auto m = fdel::parse_model(model);
        fdel::TimeSeries x = innovations == "gaussian"
                                 ? fdel::simulate_gaussian(m, n, seed)
                                 : fdel::simulate_linear(fdel::ma_weights(m, 4 * n),
                                                         {fdel::innovation_variance(m), fdel::InnovationKind::chi_square},
                                                         n, seed);
        Output o(c.output);
        fdel::write_column(o.stream(), x.values());
        return 0;
    }

    if (*experiment) {
        std::ifstream in(config, std::ios::binary);
        if (!in) throw fdel::InvalidInput("cannot read config file '" + config + "'");
        const auto specs = fdel::parse_experiments(in);
        Output o(c.output);
        bool degraded = false;
        for (const auto& spec : specs) {
            const auto s = fdel::run_experiment(spec, threads);
            o.stream() << fdel::to_json(s, timing).dump() << '\n' << std::flush;
            degraded = degraded || s.degraded;
        }
        return degraded ? exit_numerical : 0;
    }

    const auto pg = fdel::periodogram(load(c.input));

    if (*gof) {
        fdel::SearchOptions opt;
        apply_bounds(c.bounds, opt);
        if (!family.empty()) {
            write_json(fdel::to_json(fdel::test_gof_composite(fdel::whittle_family(family), pg, c.level, opt)),
                       c.output);
        } else {
            const auto null = fdel::parse_model(f0.empty() ? "white(1)" : f0);
            write_json(fdel::to_json(fdel::test_gof_simple(null, pg, c.level)), c.output);
        }
        return 0;
    }

    const auto system = fdel::parse_system(c.system);
    const auto variant = variant_for(c, system);
    fdel::SearchOptions opt;
    apply_bounds(c.bounds, opt);

    if (*analyze) {
        if (!theta.empty() || system.p == 0) {
            const auto t0 = theta.empty() ? fdel::Vector(0) : parse_list(theta, "theta");
            write_json(fdel::to_json(fdel::test_parameter(system, pg, variant, t0, c.level, opt)), c.output);
        } else {
            if (system.r <= system.p)
                throw fdel::InvalidInput("system '" + c.system + "' is just identified; pass --theta");
            write_json(fdel::to_json(fdel::test_moment_validity(system, pg, variant, c.level, opt)), c.output);
        }
        return 0;
    }
    if (*mele_cmd) {
        write_json(fdel::to_json(fdel::mele(system, pg, variant, opt)), c.output);
        return 0;
    }
    fdel::RegionOptions ropt;
    ropt.search = opt;
    ropt.resolution = resolution;
    write_json(fdel::to_json(fdel::confidence_region(system, pg, variant, c.level, ropt)), c.output);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const fdel::NumericalFailure& e) {
        std::cerr << "fdel: numerical failure: " << e.what() << '\n';
        return exit_numerical;
    } catch (const fdel::EstimationFailure& e) {
        std::cerr << "fdel: estimation failed: " << e.what() << '\n';
        return exit_numerical;
    } catch (const std::logic_error& e) {
        std::cerr << "fdel: " << e.what() << '\n';
        return exit_input;
    } catch (const std::exception& e) {
        std::cerr << "fdel: " << e.what() << '\n';
        return exit_numerical;
    }
}
