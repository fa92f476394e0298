#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace growcoag {

/// Geometric volume grid: strictly increasing edges in constant ratio,
/// centers at the geometric mean of adjacent edges.
class SizeGrid {
public:
    static std::shared_ptr<const SizeGrid> geometric(double vmin, double vmax, int cells);

    double vmin() const { return edges_.front(); }
    double vmax() const { return edges_.back(); }
    int cells() const { return static_cast<int>(widths_.size()); }
    std::span<const double> edges() const { return edges_; }
    std::span<const double> centers() const { return centers_; }
    std::span<const double> widths() const { return widths_; }
    double center(int i) const { return centers_[i]; }
    double width(int i) const { return widths_[i]; }

    /// Cell index containing v, or -1 outside [vmin, vmax].
    int locate(double v) const;

    std::uint64_t hash() const { return hash_; }
    std::string describe() const;

private:
    SizeGrid() = default;
    std::vector<double> edges_, centers_, widths_;
    std::uint64_t hash_ = 0;
};

/// Per-cell number density on a shared grid; a value-like snapshot c(t, .).
struct DensityState {
    std::shared_ptr<const SizeGrid> grid;
    std::vector<double> values;
    double time = 0.0;
};

DensityState zero_state(std::shared_ptr<const SizeGrid> grid, double time = 0.0);

/// Midpoint moment  sum_i center_i^m values_i width_i.
double moment(const DensityState& state, double m);

/// L1 norm sum_i |values_i| width_i.
double l1_norm(const DensityState& state);
double l1_distance(const DensityState& a, const DensityState& b);

/// Distance in the (v^-beta + v) weighted L1 norm; states must share a grid.
double weighted_norm(const DensityState& a, const DensityState& b, double beta);

/// Piecewise-linear interpolation in log v between cell centers; constant on
/// the half-cells next to the boundary, 0 outside [vmin, vmax]. Sign-agnostic.
double interp_on_grid(const SizeGrid& grid, std::span<const double> values, double v);

/// DensityState-facing wrapper around interp_on_grid.
double sample_density(const DensityState& state, double v);

struct Exponential {
    double scale = 1.0; // c0(v) = exp(-v / scale)
};
struct TruncatedPowerLaw {
    double exponent;
    double lo;
    double hi; // c0(v) = v^exponent on [lo, hi], 0 elsewhere
};
struct Tabulated {
    std::string path; // two-column text: volume density, '#' comments
};

using InitialFamily = std::variant<Exponential, TruncatedPowerLaw, Tabulated>;

/// Projects the initial density onto the grid by per-cell 5-point Gauss
/// averages. Tabulated input is validated (increasing volumes, nonnegative).
DensityState project_initial(const InitialFamily& family,
                             std::shared_ptr<const SizeGrid> grid);

std::string describe(const InitialFamily& family);

} // namespace growcoag
