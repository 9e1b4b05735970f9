#include "cir/cli/commands.hpp"

#include "cir/squaring.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <sstream>

namespace cir::cli {

namespace {

std::string format_complex(const std::complex<double>& z) {
    std::ostringstream s;
    s << std::setprecision(6) << z.real();
    if (z.imag() != 0.0) {
        s << (z.imag() > 0 ? "+" : "-") << std::abs(z.imag()) << "i";
    }
    return s.str();
}

std::string format_spectrum(const Spectrum& values) {
    if (values.empty()) {
        return "(none)";
    }
    std::string out;
    for (const auto& z : values) {
        if (!out.empty()) out += ", ";
        out += format_complex(z);
    }
    return out;
}

void print_warnings(std::ostream& err, const FeasibilityReport& report) {
    for (const auto& w : report.warnings) {
        err << "warning: " << w << '\n';
    }
}

// Opens `path` for writing, or returns nullptr when output goes to `fallback`.
std::unique_ptr<std::ofstream> open_output(const std::optional<std::filesystem::path>& path) {
    if (!path) {
        return nullptr;
    }
    if (path->has_parent_path()) {
        std::filesystem::create_directories(path->parent_path());
    }
    auto file = std::make_unique<std::ofstream>(*path);
    if (!*file) {
        throw ConfigError(path->string() + ": cannot open for writing");
    }
    return file;
}

std::uint64_t seed_of(const ExperimentConfig& config, const CommandOptions& options) {
    return options.seed.value_or(config.noise.seed);
}

} // namespace

void render_report(std::ostream& out, const FeasibilityReport& report) {
    out << "rank(B): " << report.rank_B << '\n'
        << "rank(CB): " << report.rank_CB << '\n'
        << "controllability rank: " << report.ctrb_rank << '\n'
        << "observability rank: " << report.obsv_rank << '\n'
        << "square: " << (report.is_square ? "yes" : "no") << '\n'
        << "trackable: " << (report.is_trackable ? "yes" : "no") << '\n'
        << "eigenvalues: " << format_spectrum(report.eigenvalues) << '\n'
        << "invariant zeros: " << (report.zeros ? format_spectrum(*report.zeros) : "n/a") << '\n'
        << "minimum phase: "
        << (report.min_phase ? (*report.min_phase ? "yes" : "no") : "n/a") << '\n';
}

int cmd_check(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
    const StateSpaceModel& model = config.model;
    out << "model: n=" << model.states() << " p=" << model.inputs() << " l=" << model.outputs()
        << " dt=" << model.dt() << '\n';
    const auto report = check_feasibility(model);
    render_report(out, report);
    print_warnings(err, report);
    if (config.mode == NonSquareMode::None) {
        return report.is_trackable ? kExitOk : kExitInfeasible;
    }

    out << "non-square mode: " << to_string(config.mode) << '\n';
    const auto resolved = resolve(config);
    if (config.mode == NonSquareMode::Project) {
        // The controller runs on the original model; only the reference changes.
        const auto batch = reachable_batch(model, std::max(config.steps, 1));
        out << "batch horizon: " << batch.horizon << ", rank(M): " << numerical_rank(batch.M)
            << " of " << batch.M.cols() << '\n';
        return kExitOk;
    }
    const auto squared = check_feasibility(resolved.design_model);
    out << "-- squared model --\n";
    render_report(out, squared);
    print_warnings(err, squared);
    return squared.is_trackable ? kExitOk : kExitInfeasible;
}

int cmd_run(const ExperimentConfig& config, const CommandOptions& options, std::ostream& out,
            std::ostream& err) {
    const auto resolved = resolve(config);
    print_warnings(err, check_feasibility(resolved.design_model));

    const auto trace = run_scenario(resolved.scenario, seed_of(config, options));
    const auto file = open_output(options.out ? options.out : config.trace_path);
    write_trace_csv(file ? *file : out, trace, resolved.raw_reference);
    write_mse_lines(file ? out : err, mean_squared_error(trace.tracking_error()));
    return kExitOk;
}

int cmd_montecarlo(const ExperimentConfig& config, const CommandOptions& options,
                   std::ostream& out, std::ostream& err) {
    const int runs = options.runs.value_or(config.runs);
    if (runs < 1) {
        throw ConfigError("--runs: must be >= 1");
    }
    const auto resolved = resolve(config);
    print_warnings(err, check_feasibility(resolved.design_model));

    const auto summary = monte_carlo(resolved.scenario, runs, seed_of(config, options));
    const auto file = open_output(options.out ? options.out : config.summary_path);
    write_monte_carlo_csv(file ? *file : out, summary, resolved.plant.dt());
    write_mse_lines(file ? out : err, summary.mse_per_channel);
    return kExitOk;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Command following by input reconstruction: experiment runner", "cir"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::uint64_t seed = 0;
    int runs = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "Experiment config (JSON)")->required();
    };
    auto* check = app.add_subcommand("check", "Report ranks, spectra and trackability");
    add_common(check);
    auto* run = app.add_subcommand("run", "Run one closed-loop simulation and write a trace CSV");
    add_common(run);
    auto* mc = app.add_subcommand("montecarlo", "Run a seeded Monte Carlo sweep");
    add_common(mc);
    for (auto* sub : {run, mc}) {
        sub->add_option("--out", out_path, "Output CSV path (default: config output, else stdout)");
        sub->add_option("--seed", seed, "Seed, overrides the config");
    }
    mc->add_option("--runs", runs, "Number of runs, overrides the config")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    CommandOptions options;
    for (auto* sub : {run, mc}) {
        if (sub->count("--out")) options.out = out_path;
        if (sub->count("--seed")) options.seed = seed;
    }
    if (mc->count("--runs")) options.runs = runs;

    try {
        const auto config = load_config(config_path);
        if (*check) return cmd_check(config, out, err);
        if (*run) return cmd_run(config, options, out, err);
        return cmd_montecarlo(config, options, out, err);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const UnsupportedShapeError& e) {
        err << "infeasible: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const InfeasibleError& e) {
        err << "infeasible: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const NumericalFailureError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const InvalidInputError& e) {
        err << "invalid input: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }
}

} // namespace cir::cli
