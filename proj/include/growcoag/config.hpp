#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "growcoag/experiments.hpp"

namespace growcoag {

enum class ConfigErrorKind { MissingFile, Parse, Validation };

class ConfigError : public std::runtime_error {
public:
    ConfigError(ConfigErrorKind kind_in, std::vector<std::string> violations_in)
        : std::runtime_error(violations_in.empty() ? "configuration error"
                                                   : violations_in.front()),
          kind(kind_in), violations(std::move(violations_in)) {}
    ConfigErrorKind kind;
    std::vector<std::string> violations; // every violation, not just the first
};

// process exit codes of the command-line front end
enum ExitCode : int {
    kExitOk = 0,
    kExitInvariantViolation = 2,
    kExitNonconvergence = 3,
    kExitMissingConfig = 4,
    kExitParseError = 5,
    kExitValidationError = 6,
};

int exit_code_for(const ConfigError& err);

/// Fully validated run configuration with the resolved domain objects.
struct RunConfig {
    KernelSpec kernel = make_kernel(ConstantKernel{1.0});
    int n = 50;
    GrowthField field = make_growth_field(ZeroGrowth{}, 1.0, 1.0);
    double vmin = 1e-4, vmax = 1e4;
    int cells = 256;
    InitialFamily initial = Exponential{1.0};
    SolverConfig solver;

    std::string experiment_kind; // "", "depend", "converge", "tails"
    std::vector<double> amplitudes;
    std::vector<int> n_values;
    std::vector<double> radii;

    std::string output_dir = "out";
    bool verification_mode = false;

    std::string echo() const; // flat key = value block, resolved values
};

/// Reads the sectioned key = value config file ('#' comments). Throws
/// ConfigError with every violation listed.
RunConfig parse_config(const std::string& path);

/// Builds the grid, projects the initial data and bundles the solver inputs.
Scenario make_scenario(const RunConfig& config);

void write_manifest(const std::string& path, const RunConfig& config,
                    const std::vector<StepReport>& windows, const MomentReport& moments);

} // namespace growcoag
