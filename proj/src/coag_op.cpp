#include "growcoag/coag_op.hpp"
#include "growcoag/common.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace growcoag {

namespace {
constexpr std::uint64_t kCacheMagic = 0x67636f6167746231ull; // "gcoagtb1"
}

PairTable::PairTable(TruncatedKernel kernel, std::shared_ptr<const SizeGrid> grid)
    : kernel_(std::move(kernel)), grid_(std::move(grid)) {
    const auto& g = *grid_;
    const int n = kernel_.n;
    if (1.0 / n < g.vmin() || double(n) > g.vmax())
        throw std::invalid_argument("grid must contain the truncation range [1/n, n]");

    const auto centers = g.centers();
    active_begin_ = g.cells();
    active_end_ = 0;
    for (int i = 0; i < g.cells(); ++i) {
        if (centers[i] > 1.0 / n && centers[i] < double(n)) {
            active_begin_ = std::min(active_begin_, i);
            active_end_ = std::max(active_end_, i + 1);
        }
    }
    if (active_begin_ >= active_end_) {
        active_begin_ = active_end_ = 0;
        return; // kernel support misses every cell center
    }

    const int na = active_end_ - active_begin_;
    loss_.assign(std::size_t(na) * na, 0.0);
    for (int i = active_begin_; i < active_end_; ++i)
        for (int j = active_begin_; j < active_end_; ++j)
            loss_[std::size_t(i - active_begin_) * na + (j - active_begin_)] =
                kernel_.evaluate_truncated(centers[i], centers[j]);

    for (int j = active_begin_; j < active_end_; ++j) {
        for (int k = j; k < active_end_; ++k) {
            const double kval = kernel_.evaluate_truncated(centers[j], centers[k]);
            if (kval == 0.0)
                continue;
            PairEntry e{};
            e.j = j;
            e.k = k;
            e.kval = kval;
            e.sum = centers[j] + centers[k];
            if (e.sum > g.vmax()) {
                e.overflow = true;
            } else if (e.sum >= centers[g.cells() - 1]) {
                // beyond the last center but on the grid: single cell, exact mass
                e.lo = e.hi = g.cells() - 1;
                e.wlo = e.sum / centers[g.cells() - 1];
                e.whi = 0.0;
            } else {
                const auto it = std::upper_bound(centers.begin(), centers.end(), e.sum);
                e.hi = static_cast<int>(it - centers.begin());
                e.lo = e.hi - 1;
                const double xlo = centers[e.lo], xhi = centers[e.hi];
                e.wlo = (xhi - e.sum) / (xhi - xlo);
                e.whi = (e.sum - xlo) / (xhi - xlo);
            }
            pairs_.push_back(e);
        }
    }
}

double PairTable::loss_kernel(int i, int j) const {
    if (i < active_begin_ || i >= active_end_ || j < active_begin_ || j >= active_end_)
        return 0.0;
    const int na = active_end_ - active_begin_;
    return loss_[std::size_t(i - active_begin_) * na + (j - active_begin_)];
}

bool PairTable::operator==(const PairTable& other) const {
    if (active_begin_ != other.active_begin_ || active_end_ != other.active_end_ ||
        pairs_.size() != other.pairs_.size() || loss_ != other.loss_)
        return false;
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
        const auto& a = pairs_[i];
        const auto& b = other.pairs_[i];
        if (a.j != b.j || a.k != b.k || a.kval != b.kval || a.sum != b.sum || a.lo != b.lo ||
            a.hi != b.hi || a.wlo != b.wlo || a.whi != b.whi || a.overflow != b.overflow)
            return false;
    }
    return true;
}

PairTable build_pair_table(const TruncatedKernel& kernel,
                           std::shared_ptr<const SizeGrid> grid) {
    return PairTable(kernel, std::move(grid));
}

QnResult apply_Qn(const DensityState& state, const PairTable& table) {
    if (state.grid.get() != table.grid_ptr().get())
        throw std::invalid_argument("state grid does not match the pair table grid");
    const auto& g = table.grid();
    QnResult out;
    out.rate.assign(g.cells(), 0.0);

    const auto& c = state.values;
    const auto widths = g.widths();

    // loss: c_i * sum_j K_n(x_i, x_j) c_j w_j over the active block
    for (int i = table.active_begin(); i < table.active_end(); ++i) {
        if (c[i] == 0.0)
            continue;
        double s = 0.0;
        for (int j = table.active_begin(); j < table.active_end(); ++j)
            s += table.loss_kernel(i, j) * c[j] * widths[j];
        out.rate[i] -= c[i] * s;
    }

    // gain: each unordered pair once, diagonal with factor 1/2
    for (const auto& e : table.pairs()) {
        const double f =
            e.kval * c[e.j] * c[e.k] * widths[e.j] * widths[e.k] * (e.j == e.k ? 0.5 : 1.0);
        if (f == 0.0)
            continue;
        if (e.overflow) {
            out.overflow_mass_rate += f * e.sum;
            out.overflow_number_rate += f;
        } else {
            out.rate[e.lo] += f * e.wlo / widths[e.lo];
            if (e.whi != 0.0)
                out.rate[e.hi] += f * e.whi / widths[e.hi];
        }
    }
    return out;
}

LipschitzProbe lipschitz_probe(const PairTable& table, const DensityState& c1,
                               const DensityState& c2) {
    LipschitzProbe probe;
    probe.bound = 3.0 * table.kernel().beta_n;
    const double dist = l1_distance(c1, c2);
    if (dist == 0.0) {
        probe.skipped = true;
        return probe;
    }
    const auto q1 = apply_Qn(c1, table);
    const auto q2 = apply_Qn(c2, table);
    const auto widths = table.grid().widths();
    double num = 0.0;
    for (int i = 0; i < table.grid().cells(); ++i)
        num += std::abs(q1.rate[i] - q2.rate[i]) * widths[i];
    probe.ratio = num / (dist * (l1_norm(c1) + l1_norm(c2)));
    return probe;
}

void dump_pair_table(const PairTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open pair table cache for writing: " + path);
    auto put = [&](const auto& x) { out.write(reinterpret_cast<const char*>(&x), sizeof(x)); };
    put(kCacheMagic);
    const std::uint64_t khash = kernel_hash(table.kernel().base);
    const std::uint64_t ghash = table.grid().hash();
    const std::int64_t n = table.kernel().n;
    put(khash);
    put(ghash);
    put(n);
    put(table.kernel().beta_n);
    const std::int64_t ab = table.active_begin(), ae = table.active_end();
    put(ab);
    put(ae);
    const std::uint64_t npairs = table.pairs().size();
    put(npairs);
    for (const auto& e : table.pairs())
        put(e);
    for (int i = table.active_begin(); i < table.active_end(); ++i)
        for (int j = table.active_begin(); j < table.active_end(); ++j) {
            const double v = table.loss_kernel(i, j);
            put(v);
        }
}

PairTable load_pair_table(const std::string& path, const TruncatedKernel& kernel,
                          std::shared_ptr<const SizeGrid> grid) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open pair table cache: " + path);
    auto get = [&](auto& x) { in.read(reinterpret_cast<char*>(&x), sizeof(x)); };
    std::uint64_t magic = 0, khash = 0, ghash = 0;
    get(magic);
    get(khash);
    get(ghash);
    std::int64_t n = 0;
    get(n);
    if (magic != kCacheMagic || khash != kernel_hash(kernel.base) || ghash != grid->hash() ||
        n != kernel.n)
        throw std::runtime_error("pair table cache key mismatch: " + path);
    PairTable table;
    table.kernel_ = kernel;
    table.grid_ = std::move(grid);
    get(table.kernel_.beta_n);
    std::int64_t ab = 0, ae = 0;
    get(ab);
    get(ae);
    table.active_begin_ = static_cast<int>(ab);
    table.active_end_ = static_cast<int>(ae);
    std::uint64_t npairs = 0;
    get(npairs);
    table.pairs_.resize(npairs);
    for (auto& e : table.pairs_)
        get(e);
    const int na = table.active_end_ - table.active_begin_;
    table.loss_.resize(std::size_t(na) * na);
    for (auto& v : table.loss_)
        get(v);
    if (!in)
        throw std::runtime_error("pair table cache truncated: " + path);
    return table;
}

} // namespace growcoag
