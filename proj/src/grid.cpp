#include "growcoag/grid.hpp"
#include "growcoag/common.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace growcoag {

namespace {

// 5-point Gauss-Legendre on [-1, 1]
constexpr double kGaussNode[5] = {-0.906179845938664, -0.538469310105683, 0.0,
                                  0.538469310105683, 0.906179845938664};
constexpr double kGaussWeight[5] = {0.236926885056189, 0.478628670499366, 0.568888888888889,
                                    0.478628670499366, 0.236926885056189};

struct Table {
    std::vector<double> v, c;
    double operator()(double x) const {
        if (x <= v.front() || x >= v.back()) {
            if (x == v.front())
                return c.front();
            if (x == v.back())
                return c.back();
            return 0.0;
        }
        const auto it = std::upper_bound(v.begin(), v.end(), x);
        const std::size_t hi = it - v.begin();
        const double f = (x - v[hi - 1]) / (v[hi] - v[hi - 1]);
        return c[hi - 1] + f * (c[hi] - c[hi - 1]);
    }
};

Table read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open tabulated initial data: " + path);
    Table table;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        double v, c;
        if (!(ls >> v))
            continue; // blank or comment-only line
        if (!(ls >> c))
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected two columns (volume density)");
        if (!table.v.empty() && v <= table.v.back())
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": volumes must be strictly increasing");
        if (!(v > 0.0))
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": volumes must be positive");
        if (c < 0.0)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": densities must be nonnegative");
        table.v.push_back(v);
        table.c.push_back(c);
    }
    if (table.v.size() < 2)
        throw std::runtime_error(path + ": need at least two table rows");
    return table;
}

} // namespace

std::shared_ptr<const SizeGrid> SizeGrid::geometric(double vmin, double vmax, int cells) {
    if (!(vmin > 0.0) || !(vmax > vmin))
        throw std::invalid_argument("grid requires 0 < vmin < vmax");
    if (cells < 2)
        throw std::invalid_argument("grid requires at least 2 cells");
    auto grid = std::shared_ptr<SizeGrid>(new SizeGrid);
    grid->edges_.resize(cells + 1);
    const double la = std::log(vmin), lb = std::log(vmax);
    for (int i = 1; i < cells; ++i)
        grid->edges_[i] = std::exp(la + (lb - la) * i / cells);
    grid->edges_.front() = vmin;
    grid->edges_.back() = vmax;
    grid->centers_.resize(cells);
    grid->widths_.resize(cells);
    for (int i = 0; i < cells; ++i) {
        grid->centers_[i] = std::sqrt(grid->edges_[i] * grid->edges_[i + 1]);
        grid->widths_[i] = grid->edges_[i + 1] - grid->edges_[i];
    }
    grid->hash_ = fnv1a64(grid->describe());
    return grid;
}

int SizeGrid::locate(double v) const {
    if (v < vmin() || v > vmax())
        return -1;
    const auto it = std::upper_bound(edges_.begin(), edges_.end(), v);
    int idx = static_cast<int>(it - edges_.begin()) - 1;
    return std::min(std::max(idx, 0), cells() - 1);
}

std::string SizeGrid::describe() const {
    std::ostringstream os;
    os << "geometric vmin=" << format_g12(vmin()) << " vmax=" << format_g12(vmax())
       << " cells=" << cells();
    return os.str();
}

DensityState zero_state(std::shared_ptr<const SizeGrid> grid, double time) {
    DensityState state;
    state.values.assign(grid->cells(), 0.0);
    state.grid = std::move(grid);
    state.time = time;
    return state;
}

double moment(const DensityState& state, double m) {
    const auto& grid = *state.grid;
    double sum = 0.0;
    for (int i = 0; i < grid.cells(); ++i)
        sum += std::pow(grid.center(i), m) * state.values[i] * grid.width(i);
    return sum;
}

double l1_norm(const DensityState& state) {
    const auto& grid = *state.grid;
    double sum = 0.0;
    for (int i = 0; i < grid.cells(); ++i)
        sum += std::abs(state.values[i]) * grid.width(i);
    return sum;
}

double l1_distance(const DensityState& a, const DensityState& b) {
    if (a.grid.get() != b.grid.get())
        throw std::invalid_argument("states must share one grid");
    const auto& grid = *a.grid;
    double sum = 0.0;
    for (int i = 0; i < grid.cells(); ++i)
        sum += std::abs(a.values[i] - b.values[i]) * grid.width(i);
    return sum;
}

double weighted_norm(const DensityState& a, const DensityState& b, double beta) {
    if (a.grid.get() != b.grid.get())
        throw std::invalid_argument("states must share one grid");
    const auto& grid = *a.grid;
    double sum = 0.0;
    for (int i = 0; i < grid.cells(); ++i) {
        const double x = grid.center(i);
        sum += (std::pow(x, -beta) + x) * std::abs(a.values[i] - b.values[i]) * grid.width(i);
    }
    return sum;
}

double interp_on_grid(const SizeGrid& grid, std::span<const double> values, double v) {
    if (v < grid.vmin() || v > grid.vmax())
        return 0.0;
    const auto centers = grid.centers();
    const int n = grid.cells();
    if (v <= centers[0])
        return values[0];
    if (v >= centers[n - 1])
        return values[n - 1];
    const auto it = std::upper_bound(centers.begin(), centers.end(), v);
    const int hi = static_cast<int>(it - centers.begin());
    const int lo = hi - 1;
    const double f = std::log(v / centers[lo]) / std::log(centers[hi] / centers[lo]);
    return values[lo] + f * (values[hi] - values[lo]);
}

double sample_density(const DensityState& state, double v) {
    if (!(v > 0.0))
        return 0.0;
    return interp_on_grid(*state.grid, state.values, v);
}

DensityState project_initial(const InitialFamily& family, std::shared_ptr<const SizeGrid> grid) {
    DensityState state = zero_state(grid);
    auto project = [&](auto&& density) {
        for (int i = 0; i < grid->cells(); ++i) {
            const double a = grid->edges()[i], b = grid->edges()[i + 1];
            const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
            double integral = 0.0;
            for (int q = 0; q < 5; ++q)
                integral += kGaussWeight[q] * density(mid + half * kGaussNode[q]);
            state.values[i] = 0.5 * integral; // cell average: (1/w) * integral, w = 2*half
        }
    };
    std::visit(
        [&](const auto& fam) {
            using T = std::decay_t<decltype(fam)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                if (!(fam.scale > 0.0))
                    throw std::invalid_argument("exponential initial data needs scale > 0");
                project([&](double v) { return std::exp(-v / fam.scale); });
            } else if constexpr (std::is_same_v<T, TruncatedPowerLaw>) {
                if (!(fam.lo > 0.0) || !(fam.hi > fam.lo))
                    throw std::invalid_argument("power-law initial data needs 0 < lo < hi");
                project([&](double v) {
                    return (v >= fam.lo && v <= fam.hi) ? std::pow(v, fam.exponent) : 0.0;
                });
            } else {
                const Table table = read_table(fam.path);
                project([&](double v) { return table(v); });
            }
        },
        family);
    return state;
}

std::string describe(const InitialFamily& family) {
    std::ostringstream os;
    std::visit(
        [&](const auto& fam) {
            using T = std::decay_t<decltype(fam)>;
            if constexpr (std::is_same_v<T, Exponential>)
                os << "exponential(" << format_g12(fam.scale) << ")";
            else if constexpr (std::is_same_v<T, TruncatedPowerLaw>)
                os << "powerlaw(" << format_g12(fam.exponent) << "," << format_g12(fam.lo) << ","
                   << format_g12(fam.hi) << ")";
            else
                os << "tabulated(" << fam.path << ")";
        },
        family);
    return os.str();
}

} // namespace growcoag
