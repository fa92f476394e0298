#include "growcoag/config.hpp"
#include "growcoag/common.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace growcoag {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos)
        return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

struct RawConfig {
    std::map<std::string, std::string> entries; // "section.key" -> value
    bool has(const std::string& key) const { return entries.count(key) != 0; }
};

const std::vector<std::string> kKnownKeys = {
    "kernel.family",     "kernel.params",          "kernel.beta",
    "kernel.k_env",      "growth.family",          "growth.params",
    "growth.a",          "growth.b",               "grid.vmin",
    "grid.vmax",         "grid.cells",             "initial.family",
    "initial.params",    "initial.file",           "solver.n",
    "solver.substeps",   "solver.picard_tol",      "solver.picard_max_iters",
    "solver.t_final",    "solver.window_cap",      "experiment.kind",
    "experiment.amplitudes", "experiment.n_values", "experiment.radii",
    "output.directory",  "output.verification_mode",
};

RawConfig read_raw(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError(ConfigErrorKind::MissingFile, {"cannot open config file: " + path});
    RawConfig raw;
    std::vector<std::string> parse_errors;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                parse_errors.push_back(path + ":" + std::to_string(lineno) +
                                       ": malformed section header '" + line + "'");
                continue;
            }
            section = lower(trim(line.substr(1, line.size() - 2)));
            if (section.empty())
                parse_errors.push_back(path + ":" + std::to_string(lineno) +
                                       ": empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            parse_errors.push_back(path + ":" + std::to_string(lineno) +
                                   ": expected 'key = value', got '" + line + "'");
            continue;
        }
        const std::string key = lower(trim(line.substr(0, eq)));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || section.empty()) {
            parse_errors.push_back(path + ":" + std::to_string(lineno) +
                                   ": key outside a section or empty key");
            continue;
        }
        raw.entries[section + "." + key] = value;
    }
    if (!parse_errors.empty())
        throw ConfigError(ConfigErrorKind::Parse, parse_errors);
    return raw;
}

class Validator {
public:
    explicit Validator(const RawConfig& raw) : raw_(raw) {}
    std::vector<std::string> violations;

    void fail(const std::string& message) { violations.push_back(message); }

    bool get_double(const std::string& key, double& out) {
        auto it = raw_.entries.find(key);
        if (it == raw_.entries.end())
            return false;
        std::istringstream is(it->second);
        double v;
        if (!(is >> v) || !(is >> std::ws).eof()) {
            fail(key + ": not a number: '" + it->second + "'");
            return false;
        }
        out = v;
        return true;
    }

    bool get_int(const std::string& key, int& out) {
        auto it = raw_.entries.find(key);
        if (it == raw_.entries.end())
            return false;
        std::istringstream is(it->second);
        long v;
        if (!(is >> v) || !(is >> std::ws).eof()) {
            fail(key + ": not an integer: '" + it->second + "'");
            return false;
        }
        out = static_cast<int>(v);
        return true;
    }

    bool get_string(const std::string& key, std::string& out) {
        auto it = raw_.entries.find(key);
        if (it == raw_.entries.end())
            return false;
        out = it->second;
        return true;
    }

    bool get_double_list(const std::string& key, std::vector<double>& out) {
        auto it = raw_.entries.find(key);
        if (it == raw_.entries.end())
            return false;
        std::string spaced = it->second;
        std::replace(spaced.begin(), spaced.end(), ',', ' ');
        std::istringstream is(spaced);
        std::vector<double> values;
        double v;
        while (is >> v)
            values.push_back(v);
        if (!is.eof()) {
            fail(key + ": not a number list: '" + it->second + "'");
            return false;
        }
        out = std::move(values);
        return true;
    }

    void check_known_keys() {
        for (const auto& [key, value] : raw_.entries) {
            (void)value;
            if (std::find(kKnownKeys.begin(), kKnownKeys.end(), key) == kKnownKeys.end())
                fail("unknown config key: " + key);
        }
    }

private:
    const RawConfig& raw_;
};

} // namespace

int exit_code_for(const ConfigError& err) {
    switch (err.kind) {
    case ConfigErrorKind::MissingFile:
        return kExitMissingConfig;
    case ConfigErrorKind::Parse:
        return kExitParseError;
    case ConfigErrorKind::Validation:
        return kExitValidationError;
    }
    return kExitValidationError;
}

RunConfig parse_config(const std::string& path) {
    const RawConfig raw = read_raw(path);
    Validator v(raw);
    v.check_known_keys();
    RunConfig config;

    // kernel
    {
        std::string family = "constant";
        v.get_string("kernel.family", family);
        family = lower(family);
        std::vector<double> params;
        v.get_double_list("kernel.params", params);
        KernelFamily fam = ConstantKernel{1.0};
        bool family_ok = true;
        if (family == "smoluchowski") {
            if (!params.empty())
                v.fail("kernel.params: smoluchowski takes no parameters");
            fam = Smoluchowski{};
        } else if (family == "granulation") {
            if (params.size() != 2) {
                v.fail("kernel.params: granulation needs 'theta1 theta2'");
                family_ok = false;
            } else {
                fam = Granulation{params[0], params[1]};
            }
        } else if (family == "stirredfroth") {
            if (params.size() != 1) {
                v.fail("kernel.params: stirredfroth needs 'theta'");
                family_ok = false;
            } else {
                fam = StirredFroth{params[0]};
            }
        } else if (family == "constant") {
            if (params.size() > 1) {
                v.fail("kernel.params: constant takes at most 'kappa'");
                family_ok = false;
            } else {
                fam = ConstantKernel{params.empty() ? 1.0 : params[0]};
            }
        } else {
            v.fail("kernel.family: unknown family '" + family + "'");
            family_ok = false;
        }
        if (family_ok) {
            try {
                KernelSpec spec = make_kernel(fam);
                double beta = spec.beta, k_env = spec.k_env;
                v.get_double("kernel.beta", beta);
                v.get_double("kernel.k_env", k_env);
                config.kernel = make_kernel(fam, beta, k_env);
            } catch (const std::exception& e) {
                // defaults unavailable (e.g. granulation theta2 = 0): beta and
                // k_env must be explicit
                double beta = 0, k_env = 0;
                const bool has_beta = v.get_double("kernel.beta", beta);
                const bool has_k = v.get_double("kernel.k_env", k_env);
                if (!has_beta || !has_k) {
                    v.fail(std::string("kernel: ") + e.what());
                } else {
                    try {
                        config.kernel = make_kernel(fam, beta, k_env);
                    } catch (const std::exception& e2) {
                        v.fail(std::string("kernel: ") + e2.what());
                    }
                }
            }
        }
    }

    // growth
    {
        std::string family = "zero";
        v.get_string("growth.family", family);
        family = lower(family);
        std::vector<double> params;
        v.get_double_list("growth.params", params);
        double A = 1.0, B = 1.0;
        v.get_double("growth.a", A);
        v.get_double("growth.b", B);
        GrowthFamily fam = ZeroGrowth{};
        bool family_ok = true;
        if (family == "zero") {
            if (!params.empty())
                v.fail("growth.params: zero takes no parameters");
        } else if (family == "linear") {
            if (params.size() != 1) {
                v.fail("growth.params: linear needs 'a'");
                family_ok = false;
            } else {
                fam = LinearGrowth{params[0]};
            }
        } else if (family == "saturating") {
            if (params.size() != 2) {
                v.fail("growth.params: saturating needs 'a vstar'");
                family_ok = false;
            } else {
                fam = SaturatingGrowth{params[0], params[1]};
            }
        } else {
            v.fail("growth.family: unknown family '" + family + "'");
            family_ok = false;
        }
        if (family_ok) {
            try {
                config.field = make_growth_field(fam, A, B);
            } catch (const std::exception& e) {
                v.fail(std::string("growth: ") + e.what());
            }
        }
    }

    // grid
    v.get_double("grid.vmin", config.vmin);
    v.get_double("grid.vmax", config.vmax);
    v.get_int("grid.cells", config.cells);
    if (!(config.vmin > 0.0) || !(config.vmax > config.vmin))
        v.fail("grid: requires 0 < vmin < vmax");
    if (config.cells < 8)
        v.fail("grid.cells: must be at least 8");

    // solver
    v.get_int("solver.n", config.n);
    v.get_int("solver.substeps", config.solver.substeps_per_window);
    v.get_double("solver.picard_tol", config.solver.picard_tol);
    v.get_int("solver.picard_max_iters", config.solver.picard_max_iters);
    v.get_double("solver.t_final", config.solver.t_final);
    {
        std::string cap;
        if (v.get_string("solver.window_cap", cap)) {
            if (lower(cap) == "none") {
                config.solver.window_cap.reset();
            } else {
                double value;
                if (v.get_double("solver.window_cap", value)) {
                    if (!(value > 0.0))
                        v.fail("solver.window_cap: must be positive or 'none'");
                    else
                        config.solver.window_cap = value;
                }
            }
        }
    }
    if (config.n < 2)
        v.fail("solver.n: truncation index must be at least 2");
    if (config.solver.substeps_per_window < 4)
        v.fail("solver.substeps: at least 4 substeps per window");
    if (!(config.solver.picard_tol > 0.0))
        v.fail("solver.picard_tol: must be positive");
    if (config.solver.picard_max_iters < 1)
        v.fail("solver.picard_max_iters: must be at least 1");
    if (!(config.solver.t_final > 0.0))
        v.fail("solver.t_final: must be positive");

    // cross-field: the kernel truncation range must live on the grid
    if (config.n >= 2 && config.vmin > 0.0 && config.vmax > config.vmin) {
        if (1.0 / config.n < config.vmin || double(config.n) > config.vmax)
            v.fail("solver.n vs grid: [1/n, n] must be contained in [vmin, vmax]; got n=" +
                   std::to_string(config.n) + " with grid [" + format_g12(config.vmin) + ", " +
                   format_g12(config.vmax) + "]");
    }

    // initial data
    {
        std::string family = "exponential";
        v.get_string("initial.family", family);
        family = lower(family);
        std::vector<double> params;
        v.get_double_list("initial.params", params);
        if (family == "exponential") {
            const double scale = params.empty() ? 1.0 : params[0];
            if (params.size() > 1)
                v.fail("initial.params: exponential takes at most 'scale'");
            else if (!(scale > 0.0))
                v.fail("initial.params: exponential scale must be positive");
            else
                config.initial = Exponential{scale};
            // bounded near zero, so M_{-2beta} converges iff 2 beta < 1
            if (2.0 * config.kernel.beta >= 1.0)
                v.fail("initial: exponential data needs 2*beta < 1 for a finite "
                       "M_{-2beta}; got beta = " +
                       format_g12(config.kernel.beta));
        } else if (family == "powerlaw") {
            if (params.size() != 3) {
                v.fail("initial.params: powerlaw needs 'exponent lo hi'");
            } else if (!(params[1] > 0.0) || !(params[2] > params[1])) {
                v.fail("initial.params: powerlaw needs 0 < lo < hi");
            } else {
                config.initial = TruncatedPowerLaw{params[0], params[1], params[2]};
            }
        } else if (family == "tabulated") {
            std::string file;
            if (!v.get_string("initial.file", file)) {
                v.fail("initial.file: required for tabulated initial data");
            } else if (!std::ifstream(file)) {
                v.fail("initial.file: cannot open '" + file + "'");
            } else {
                config.initial = Tabulated{file};
            }
        } else {
            v.fail("initial.family: unknown family '" + family + "'");
        }
    }

    // experiment
    {
        std::string kind;
        if (v.get_string("experiment.kind", kind)) {
            kind = lower(kind);
            if (kind == "depend") {
                std::vector<double> amps;
                if (!v.get_double_list("experiment.amplitudes", amps) || amps.empty())
                    v.fail("experiment.amplitudes: required nonempty list for depend");
                else
                    config.amplitudes = amps;
            } else if (kind == "converge") {
                std::vector<double> ns;
                if (!v.get_double_list("experiment.n_values", ns) || ns.size() < 2) {
                    v.fail("experiment.n_values: need at least two truncation indices");
                } else {
                    for (double x : ns) {
                        if (x < 2 || x != std::floor(x))
                            v.fail("experiment.n_values: entries must be integers >= 2");
                        else
                            config.n_values.push_back(static_cast<int>(x));
                    }
                    for (std::size_t i = 1; i < config.n_values.size(); ++i)
                        if (config.n_values[i] <= config.n_values[i - 1])
                            v.fail("experiment.n_values: must be strictly increasing");
                    if (!config.n_values.empty() &&
                        (double(config.n_values.back()) > config.vmax ||
                         1.0 / config.n_values.back() < config.vmin))
                        v.fail("experiment.n_values: grid must contain [1/n, n] for the "
                               "largest index");
                }
            } else if (kind == "tails") {
                std::vector<double> radii;
                if (!v.get_double_list("experiment.radii", radii) || radii.empty())
                    v.fail("experiment.radii: required nonempty list for tails");
                else {
                    for (std::size_t i = 1; i < radii.size(); ++i)
                        if (radii[i] <= radii[i - 1])
                            v.fail("experiment.radii: must be strictly increasing");
                    config.radii = radii;
                }
            } else {
                v.fail("experiment.kind: unknown kind '" + kind + "'");
            }
            config.experiment_kind = kind;
        }
    }

    // output
    v.get_string("output.directory", config.output_dir);
    {
        std::string flag;
        if (v.get_string("output.verification_mode", flag)) {
            flag = lower(flag);
            if (flag == "true" || flag == "1")
                config.verification_mode = true;
            else if (flag == "false" || flag == "0")
                config.verification_mode = false;
            else
                v.fail("output.verification_mode: expected true or false");
        }
    }

    if (!v.violations.empty())
        throw ConfigError(ConfigErrorKind::Validation, v.violations);
    return config;
}

Scenario make_scenario(const RunConfig& config) {
    Scenario scenario{config.kernel,
                      config.n,
                      config.field,
                      SizeGrid::geometric(config.vmin, config.vmax, config.cells),
                      {},
                      config.solver};
    scenario.c0 = project_initial(config.initial, scenario.grid);
    return scenario;
}

std::string RunConfig::echo() const {
    std::ostringstream os;
    os << "kernel = " << describe(kernel) << '\n'
       << "kernel.hash = " << hex64(kernel_hash(kernel)) << '\n'
       << "solver.n = " << n << '\n'
       << "growth = " << describe(field) << '\n'
       << "growth.hash = " << hex64(growth_hash(field)) << '\n'
       << "grid.vmin = " << format_g12(vmin) << '\n'
       << "grid.vmax = " << format_g12(vmax) << '\n'
       << "grid.cells = " << cells << '\n'
       << "initial = " << describe(initial) << '\n'
       << "solver.substeps = " << solver.substeps_per_window << '\n'
       << "solver.picard_tol = " << format_g12(solver.picard_tol) << '\n'
       << "solver.picard_max_iters = " << solver.picard_max_iters << '\n'
       << "solver.t_final = " << format_g12(solver.t_final) << '\n'
       << "solver.window_cap = "
       << (solver.window_cap ? format_g12(*solver.window_cap) : std::string("none")) << '\n'
       << "output.directory = " << output_dir << '\n'
       << "output.verification_mode = " << (verification_mode ? "true" : "false") << '\n';
    if (!experiment_kind.empty()) {
        os << "experiment.kind = " << experiment_kind << '\n';
        auto list = [&os](const char* key, const auto& values) {
            os << key << " =";
            for (const auto& x : values)
                os << ' ' << format_g12(double(x));
            os << '\n';
        };
        if (!amplitudes.empty())
            list("experiment.amplitudes", amplitudes);
        if (!n_values.empty())
            list("experiment.n_values", n_values);
        if (!radii.empty())
            list("experiment.radii", radii);
    }
    return os.str();
}

void write_manifest(const std::string& path, const RunConfig& config,
                    const std::vector<StepReport>& windows, const MomentReport& moments) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open manifest for writing: " + path);
    out << "# growcoag run manifest\n" << config.echo();
    out << "grid.hash = "
        << hex64(SizeGrid::geometric(config.vmin, config.vmax, config.cells)->hash()) << '\n';
    out << "tolerances.m0_monotone = 1e-8 (zero growth) / 1e-4 (with growth)\n"
        << "tolerances.m1_growth = 1e-8\n"
        << "tolerances.m1_balance = 1e-4\n"
        << "tolerances.mneg2beta = 1e-6\n";
    out << "invariants.nonnegative = " << (moments.nonneg_ok ? "ok" : "VIOLATED") << '\n'
        << "invariants.m0_monotone = " << (moments.m0_monotone_ok ? "ok" : "VIOLATED")
        << " worst " << format_g12(moments.worst_m0_increase) << '\n'
        << "invariants.m1_growth = " << (moments.m1_growth_ok ? "ok" : "VIOLATED") << " worst "
        << format_g12(moments.worst_m1_excess) << '\n'
        << "invariants.m1_balance = " << (moments.m1_balance_ok ? "ok" : "VIOLATED")
        << " worst " << format_g12(moments.worst_m1_balance) << '\n'
        << "invariants.mneg2beta = " << (moments.mneg2beta_ok ? "ok" : "VIOLATED") << " worst "
        << format_g12(moments.worst_mneg2beta_excess) << '\n'
        << "max_m2 = " << format_g12(moments.max_m2) << '\n'
        << "clamped_number_total = " << format_g12(moments.total_clamped_number) << '\n'
        << "overflow_mass_total = " << format_g12(moments.total_overflow_mass) << '\n';
    for (const auto& w : windows) {
        out << "window " << w.window_index << ": t_start = " << format_g12(w.t_start)
            << " t_window = " << format_g12(w.t_window) << " kappa_n = "
            << format_g12(w.kappa_n) << " beta_n = " << format_g12(w.beta_n)
            << " iterations = " << w.picard_iterations
            << " final_residual = " << format_g12(w.final_residual)
            << " converged = " << (w.converged ? "true" : "false");
        double worst_ratio = 0.0;
        for (double r : w.contraction_ratios)
            worst_ratio = std::max(worst_ratio, r);
        out << " worst_contraction = " << format_g12(worst_ratio)
            << " clamped = " << format_g12(w.clamped_number)
            << " overflow_mass = " << format_g12(w.overflow_mass)
            << " pn_ok = " << (w.pn_ok ? "true" : "false") << '\n';
    }
}

} // namespace growcoag
