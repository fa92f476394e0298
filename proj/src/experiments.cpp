#include "growcoag/experiments.hpp"
#include "growcoag/common.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace growcoag {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open output file: " + path);
    return out;
}

/// Window cap that makes every run of a family share one substep lattice:
/// the shortest initial contraction window. Zeroth moments only decrease, so
/// later windows would only lengthen past it.
std::optional<double> aligned_cap(const std::vector<double>& window_lengths,
                                  std::optional<double> existing) {
    double cap = existing.value_or(std::numeric_limits<double>::infinity());
    for (double w : window_lengths)
        cap = std::min(cap, w);
    if (std::isinf(cap))
        return existing;
    return cap;
}

} // namespace

std::vector<DependRow> continuous_dependence(const Scenario& scenario,
                                             const std::vector<double>& amplitudes) {
    if (amplitudes.empty())
        throw std::invalid_argument("amplitude list must not be empty");
    const double beta = scenario.kernel.beta;
    const TruncatedKernel kn = truncate(scenario.kernel, scenario.n);
    const PairTable table = build_pair_table(kn, scenario.grid);

    const DensityState direction = project_initial(Exponential{0.5}, scenario.grid);

    std::vector<DensityState> initials;
    initials.push_back(scenario.c0);
    for (double eps : amplitudes) {
        DensityState p = scenario.c0;
        for (int i = 0; i < scenario.grid->cells(); ++i)
            p.values[i] += eps * direction.values[i];
        initials.push_back(std::move(p));
    }

    std::vector<double> windows;
    for (const auto& init : initials)
        windows.push_back(window_length(kn, moment(init, 0.0), scenario.cfg.window_cap));
    SolverConfig cfg = scenario.cfg;
    cfg.window_cap = aligned_cap(windows, cfg.window_cap);

    const SolveResult base = solve(scenario.c0, cfg, table, scenario.field);
    if (!base.completed)
        throw NonconvergenceError("base run did not converge", {});

    std::vector<DependRow> rows;
    for (std::size_t a = 0; a < amplitudes.size(); ++a) {
        const SolveResult run = solve(initials[a + 1], cfg, table, scenario.field);
        if (!run.completed)
            throw NonconvergenceError("perturbed run did not converge", {});
        if (run.times.size() != base.times.size())
            throw std::runtime_error("perturbed run lattice does not match the base run");
        DependRow row;
        row.amplitude = amplitudes[a];
        row.d0 = weighted_norm(initials[a + 1], scenario.c0, beta);
        row.dsup = 0.0;
        for (std::size_t i = 0; i < run.history.size(); ++i)
            row.dsup = std::max(row.dsup, weighted_norm(run.history[i], base.history[i], beta));
        row.ratio = row.d0 > 0.0 ? row.dsup / row.d0 : 0.0;
        rows.push_back(row);
    }
    return rows;
}

std::vector<LadderRow> truncation_ladder(const Scenario& scenario,
                                         const std::vector<int>& ns) {
    if (ns.size() < 2)
        throw std::invalid_argument("truncation ladder needs at least two indices");
    for (std::size_t i = 1; i < ns.size(); ++i)
        if (ns[i] <= ns[i - 1])
            throw std::invalid_argument("truncation indices must be strictly increasing");

    const double m0 = moment(scenario.c0, 0.0);
    std::vector<TruncatedKernel> kernels;
    std::vector<double> windows;
    for (int n : ns) {
        kernels.push_back(truncate(scenario.kernel, n));
        windows.push_back(window_length(kernels.back(), m0, scenario.cfg.window_cap));
    }
    SolverConfig cfg = scenario.cfg;
    cfg.window_cap = aligned_cap(windows, cfg.window_cap);

    std::vector<SolveResult> runs;
    for (const auto& kn : kernels) {
        runs.push_back(solve(scenario.c0, cfg, kn, scenario.field));
        if (!runs.back().completed)
            throw NonconvergenceError("ladder run did not converge", {});
    }

    std::vector<LadderRow> rows;
    for (std::size_t r = 1; r < runs.size(); ++r) {
        if (runs[r].times.size() != runs[r - 1].times.size())
            throw std::runtime_error("ladder rungs produced mismatched lattices");
        LadderRow row;
        row.n_coarse = ns[r - 1];
        row.n_fine = ns[r];
        row.dsup = 0.0;
        for (std::size_t i = 0; i < runs[r].history.size(); ++i)
            row.dsup =
                std::max(row.dsup, l1_distance(runs[r].history[i], runs[r - 1].history[i]));
        row.mneg2beta_max_fine = 0.0;
        for (const auto& m : runs[r].moments.rows)
            row.mneg2beta_max_fine = std::max(row.mneg2beta_max_fine, m.m_neg2beta);
        rows.push_back(row);
    }
    return rows;
}

std::vector<TailRow> tail_report(const SolveResult& run, const std::vector<double>& radii) {
    std::vector<TailRow> rows;
    for (double R : radii) {
        TailRow row;
        row.R = R;
        row.tail_sup = 0.0;
        for (const auto& state : run.history) {
            const auto& grid = *state.grid;
            double tail = 0.0;
            for (int i = 0; i < grid.cells(); ++i)
                if (grid.center(i) >= R)
                    tail += grid.center(i) * state.values[i] * grid.width(i);
            row.tail_sup = std::max(row.tail_sup, tail);
        }
        rows.push_back(row);
    }
    return rows;
}

std::vector<TailRow> tail_report(const Scenario& scenario, const std::vector<double>& radii) {
    if (radii.empty())
        throw std::invalid_argument("radius list must not be empty");
    for (std::size_t i = 1; i < radii.size(); ++i)
        if (radii[i] <= radii[i - 1])
            throw std::invalid_argument("radii must be strictly increasing");
    const TruncatedKernel kn = truncate(scenario.kernel, scenario.n);
    const SolveResult run = solve(scenario.c0, scenario.cfg, kn, scenario.field);
    if (!run.completed)
        throw NonconvergenceError("tail run did not converge", {});
    return tail_report(run, radii);
}

SuperlinearSeries superlinear_moment(const SolveResult& run, const ConvexWeight& weight) {
    SuperlinearSeries series;
    auto eval = [&](double v) {
        return std::visit(
            [&](const auto& w) -> double {
                using T = std::decay_t<decltype(w)>;
                if constexpr (std::is_same_v<T, Square>)
                    return v * v;
                else
                    return w.fn(v);
            },
            weight);
    };
    for (std::size_t r = 0; r < run.history.size(); ++r) {
        const auto& state = run.history[r];
        const auto& grid = *state.grid;
        double sum = 0.0;
        for (int i = 0; i < grid.cells(); ++i)
            sum += eval(grid.center(i)) * state.values[i] * grid.width(i);
        series.times.push_back(run.times[r]);
        series.values.push_back(sum);
        series.max_value = std::max(series.max_value, sum);
    }
    // least-squares slope of log(values) against time
    double st = 0, sy = 0, stt = 0, sty = 0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < series.values.size(); ++i) {
        if (series.values[i] <= 0.0)
            continue;
        const double y = std::log(series.values[i]);
        st += series.times[i];
        sy += y;
        stt += series.times[i] * series.times[i];
        sty += series.times[i] * y;
        ++count;
    }
    if (count >= 2) {
        const double denom = count * stt - st * st;
        if (denom > 0.0)
            series.fitted_growth_rate = (count * sty - st * sy) / denom;
    }
    return series;
}

void write_moments_csv(const std::string& path, const MomentReport& report) {
    auto out = open_out(path);
    out << "time,m_neg2beta,m0,m1,m2,wnorm\n";
    for (const auto& row : report.rows)
        out << format_g12(row.time) << ',' << format_g12(row.m_neg2beta) << ','
            << format_g12(row.m0) << ',' << format_g12(row.m1) << ',' << format_g12(row.m2)
            << ',' << format_g12(row.wnorm) << '\n';
}

void write_depend_table(const std::string& path, const std::vector<DependRow>& rows) {
    auto out = open_out(path);
    out << "amplitude,d0,dsup,ratio\n";
    for (const auto& row : rows)
        out << format_g12(row.amplitude) << ',' << format_g12(row.d0) << ','
            << format_g12(row.dsup) << ',' << format_g12(row.ratio) << '\n';
}

void write_ladder_table(const std::string& path, const std::vector<LadderRow>& rows) {
    auto out = open_out(path);
    out << "n_coarse,n_fine,dsup,mneg2beta_max_fine\n";
    for (const auto& row : rows)
        out << row.n_coarse << ',' << row.n_fine << ',' << format_g12(row.dsup) << ','
            << format_g12(row.mneg2beta_max_fine) << '\n';
}

void write_tail_table(const std::string& path, const std::vector<TailRow>& rows) {
    auto out = open_out(path);
    out << "R,tail_sup\n";
    for (const auto& row : rows)
        out << format_g12(row.R) << ',' << format_g12(row.tail_sup) << '\n';
}

void write_plot_script(const std::string& path, const std::string& table_file,
                       const std::string& title, const std::string& using_spec,
                       bool logscale_y) {
    auto out = open_out(path);
    out << "set datafile separator ','\n"
        << "set key autotitle columnhead\n"
        << "set title '" << title << "'\n";
    if (logscale_y)
        out << "set logscale y\n";
    out << "plot '" << table_file << "' using " << using_spec << " with linespoints\n"
        << "pause -1\n";
}

} // namespace growcoag
