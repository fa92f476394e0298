#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "growcoag/common.hpp"
#include "growcoag/config.hpp"

namespace fs = std::filesystem;
using namespace growcoag;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_override;
    bool verify = false;
};

void attach_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "run configuration file")->required();
    cmd->add_option("--out", args.out_override, "output directory override");
    cmd->add_flag("--verify", args.verify, "verification mode: deterministic reruns");
}

fs::path resolve_out_dir(const RunConfig& config, const CommonArgs& args) {
    std::string dir = config.output_dir;
    if (const char* env = std::getenv("GROWCOAG_OUT"); env && *env)
        dir = env;
    if (!args.out_override.empty())
        dir = args.out_override;
    fs::create_directories(dir);
    return dir;
}

void write_experiment_manifest(const fs::path& path, const RunConfig& config,
                               const std::string& kind, const std::string& table) {
    std::ofstream out(path);
    out << "# growcoag experiment manifest\n"
        << config.echo() << "experiment = " << kind << '\n'
        << "table = " << table << '\n';
}

int run_check_kernel(const RunConfig& config, const fs::path& out_dir) {
    const auto sample = envelope_sample_grid(1e-4, 1e4, 51);
    const EnvelopeReport report = verify_envelope(config.kernel, sample);
    const std::string text = to_text(report);
    std::cout << text;
    std::ofstream(out_dir / "kernel_report.txt") << text;
    return report.ok ? kExitOk : kExitInvariantViolation;
}

int run_check_growth(const RunConfig& config, const fs::path& out_dir) {
    const auto samples = growth_sample_grid();
    const GrowthCheckReport report = verify_growth_assumptions(config.field, samples);
    std::string text = to_text(report);
    const FlowPropertyReport props = flow_property_suite(config.field, 1000);
    text += "flow_properties_ok = " + std::string(props.ok ? "true" : "false") + "\n";
    text += "flow_trials = " + std::to_string(props.trials) + "\n";
    text += "flow_worst_excess = " + format_g12(props.worst_excess) + "\n";
    if (!props.worst_case.empty())
        text += "flow_worst_case = " + props.worst_case + "\n";
    std::cout << text;
    std::ofstream(out_dir / "growth_report.txt") << text;
    return (report.ok && props.ok) ? kExitOk : kExitInvariantViolation;
}

int run_simulate(const RunConfig& config, const fs::path& out_dir) {
    const Scenario scenario = make_scenario(config);
    const TruncatedKernel kn = truncate(scenario.kernel, scenario.n);
    const SolveResult result = solve(scenario.c0, scenario.cfg, kn, scenario.field);
    write_manifest((out_dir / "manifest.txt").string(), config, result.windows,
                   result.moments);
    write_moments_csv((out_dir / "moments.csv").string(), result.moments);
    if (!result.completed) {
        std::cerr << "simulate: a Picard window failed to converge; partial results written\n";
        return kExitNonconvergence;
    }
    if (!result.moments.all_ok()) {
        std::cerr << "simulate: moment invariants violated beyond tolerance; see manifest\n";
        return kExitInvariantViolation;
    }
    std::cout << "simulate: " << result.windows.size() << " windows, moments written to "
              << (out_dir / "moments.csv").string() << '\n';
    return kExitOk;
}

int run_depend(const RunConfig& config, const fs::path& out_dir) {
    const Scenario scenario = make_scenario(config);
    std::vector<double> amplitudes = config.amplitudes;
    if (amplitudes.empty())
        amplitudes = {1e-1, 1e-2, 1e-3};
    const auto rows = continuous_dependence(scenario, amplitudes);
    write_depend_table((out_dir / "depend.csv").string(), rows);
    write_plot_script((out_dir / "depend.gnuplot").string(), "depend.csv",
                      "continuous dependence on initial data", "1:4", true);
    write_experiment_manifest(out_dir / "manifest.txt", config, "depend", "depend.csv");
    std::cout << "depend: " << rows.size() << " rows written to "
              << (out_dir / "depend.csv").string() << '\n';
    return kExitOk;
}

int run_converge(const RunConfig& config, const fs::path& out_dir) {
    const Scenario scenario = make_scenario(config);
    if (config.n_values.empty())
        throw ConfigError(ConfigErrorKind::Validation,
                          {"experiment.n_values: required for the converge subcommand"});
    const auto rows = truncation_ladder(scenario, config.n_values);
    write_ladder_table((out_dir / "converge.csv").string(), rows);
    write_plot_script((out_dir / "converge.gnuplot").string(), "converge.csv",
                      "truncation ladder", "2:3", true);
    write_experiment_manifest(out_dir / "manifest.txt", config, "converge", "converge.csv");
    std::cout << "converge: " << rows.size() << " rows written to "
              << (out_dir / "converge.csv").string() << '\n';
    return kExitOk;
}

int run_tails(const RunConfig& config, const fs::path& out_dir) {
    const Scenario scenario = make_scenario(config);
    std::vector<double> radii = config.radii;
    if (radii.empty())
        radii = {config.vmax / 16.0, config.vmax / 8.0, config.vmax / 4.0};
    const auto rows = tail_report(scenario, radii);
    write_tail_table((out_dir / "tails.csv").string(), rows);
    write_plot_script((out_dir / "tails.gnuplot").string(), "tails.csv",
                      "tail first moments", "1:2", true);
    write_experiment_manifest(out_dir / "manifest.txt", config, "tails", "tails.csv");
    std::cout << "tails: " << rows.size() << " rows written to "
              << (out_dir / "tails.csv").string() << '\n';
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"growcoag: growth-coagulation solver and verification suite"};
    app.require_subcommand(1);

    CommonArgs args;
    auto* check_kernel = app.add_subcommand("check-kernel", "verify the kernel envelope");
    auto* check_growth = app.add_subcommand("check-growth", "verify the growth assumptions");
    auto* simulate = app.add_subcommand("simulate", "solve and emit the moment history");
    auto* depend = app.add_subcommand("depend", "continuous dependence experiment");
    auto* converge = app.add_subcommand("converge", "truncation ladder experiment");
    auto* tails = app.add_subcommand("tails", "tail first-moment experiment");
    for (auto* cmd : {check_kernel, check_growth, simulate, depend, converge, tails})
        attach_common(cmd, args);

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig config = parse_config(args.config_path);
        if (args.verify)
            config.verification_mode = true;
        const fs::path out_dir = resolve_out_dir(config, args);
        if (check_kernel->parsed())
            return run_check_kernel(config, out_dir);
        if (check_growth->parsed())
            return run_check_growth(config, out_dir);
        if (simulate->parsed())
            return run_simulate(config, out_dir);
        if (depend->parsed())
            return run_depend(config, out_dir);
        if (converge->parsed())
            return run_converge(config, out_dir);
        if (tails->parsed())
            return run_tails(config, out_dir);
        return kExitOk;
    } catch (const ConfigError& err) {
        for (const auto& violation : err.violations)
            std::cerr << "config: " << violation << '\n';
        return exit_code_for(err);
    } catch (const NonconvergenceError& err) {
        std::cerr << "nonconvergence: " << err.what() << '\n';
        return kExitNonconvergence;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 1;
    }
}
