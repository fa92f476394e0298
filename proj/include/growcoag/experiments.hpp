#pragma once

#include <functional>
#include <string>
#include <vector>

#include "growcoag/solver.hpp"

namespace growcoag {

/// Everything one solver run needs; experiments vary one axis of it.
struct Scenario {
    KernelSpec kernel;
    int n = 50;
    GrowthField field;
    std::shared_ptr<const SizeGrid> grid;
    DensityState c0;
    SolverConfig cfg;
};

struct DependRow {
    double amplitude;
    double d0;   // initial weighted distance
    double dsup; // sup over the lattice of the weighted distance
    double ratio;
};

/// Perturbs the initial data by amplitude * exp(-2v) and compares runs in the
/// (v^-beta + v)-weighted norm. All runs share one window length so their
/// lattices align.
std::vector<DependRow> continuous_dependence(const Scenario& scenario,
                                             const std::vector<double>& amplitudes);

struct LadderRow {
    int n_coarse, n_fine;
    double dsup;                // sup-in-time L1 distance between the two runs
    double mneg2beta_max_fine;  // max of M_{-2beta} along the finer run
};

/// Solves for each truncation index and reports distances between successive
/// rungs; the list must be strictly increasing.
std::vector<LadderRow> truncation_ladder(const Scenario& scenario, const std::vector<int>& ns);

struct TailRow {
    double R;
    double tail_sup; // sup over time of sum_{x_i >= R} x_i c_i w_i
};

std::vector<TailRow> tail_report(const Scenario& scenario, const std::vector<double>& radii);
std::vector<TailRow> tail_report(const SolveResult& run, const std::vector<double>& radii);

struct Square {};
struct UserConvex {
    std::function<double(double)> fn;
};
using ConvexWeight = std::variant<Square, UserConvex>;

struct SuperlinearSeries {
    std::vector<double> times;
    std::vector<double> values; // integral of j(v) c(t,v) dv
    double max_value = 0;
    double fitted_growth_rate = 0; // least-squares slope of log(values) vs t
};

SuperlinearSeries superlinear_moment(const SolveResult& run, const ConvexWeight& weight);

// artifact emission ---------------------------------------------------------

void write_moments_csv(const std::string& path, const MomentReport& report);
void write_depend_table(const std::string& path, const std::vector<DependRow>& rows);
void write_ladder_table(const std::string& path, const std::vector<LadderRow>& rows);
void write_tail_table(const std::string& path, const std::vector<TailRow>& rows);

/// Gnuplot-dialect script rendering one table; a convenience artifact.
void write_plot_script(const std::string& path, const std::string& table_file,
                       const std::string& title, const std::string& using_spec,
                       bool logscale_y);

} // namespace growcoag
