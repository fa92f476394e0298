#pragma once

#include <memory>
#include <string>
#include <vector>

#include "growcoag/grid.hpp"
#include "growcoag/kernels.hpp"

namespace growcoag {

/// One interacting cell pair (j <= k): kernel value and the two-point,
/// mass-exact placement of the merged size x_j + x_k.
struct PairEntry {
    int j, k;
    double kval;
    double sum;     // x_j + x_k
    int lo, hi;     // target cells; hi == lo for single-cell placement
    double wlo, whi; // number weights; wlo*x_lo + whi*x_hi == sum
    bool overflow;  // sum beyond vmax: gain routed to the ledger instead
};

/// Precomputed sectional form of the truncated coagulation operator on a grid.
class PairTable {
public:
    PairTable(TruncatedKernel kernel, std::shared_ptr<const SizeGrid> grid);

    const SizeGrid& grid() const { return *grid_; }
    const std::shared_ptr<const SizeGrid>& grid_ptr() const { return grid_; }
    const TruncatedKernel& kernel() const { return kernel_; }
    const std::vector<PairEntry>& pairs() const { return pairs_; }
    int active_begin() const { return active_begin_; }
    int active_end() const { return active_end_; }
    double loss_kernel(int i, int j) const; // K_n(x_i, x_j), 0 off the active block

    bool operator==(const PairTable& other) const;

private:
    friend PairTable load_pair_table(const std::string& path,
                                     const TruncatedKernel& kernel,
                                     std::shared_ptr<const SizeGrid> grid);
    PairTable() = default;
    TruncatedKernel kernel_{};
    std::shared_ptr<const SizeGrid> grid_;
    std::vector<PairEntry> pairs_;
    std::vector<double> loss_; // dense (active x active) block
    int active_begin_ = 0, active_end_ = 0;
};

/// Requires [1/n, n] within [vmin, vmax].
PairTable build_pair_table(const TruncatedKernel& kernel,
                           std::shared_ptr<const SizeGrid> grid);

struct QnResult {
    std::vector<double> rate;        // density rate per cell, gain minus loss
    double overflow_mass_rate = 0;   // first moment routed past vmax
    double overflow_number_rate = 0; // particle count routed past vmax
};

QnResult apply_Qn(const DensityState& state, const PairTable& table);

struct LipschitzProbe {
    bool skipped = false; // c1 == c2, ratio undefined
    double ratio = 0.0;   // ||Qn(c1)-Qn(c2)|| / (||c1-c2|| (||c1||+||c2||))
    double bound = 0.0;   // 3 beta_n
};

LipschitzProbe lipschitz_probe(const PairTable& table, const DensityState& c1,
                               const DensityState& c2);

/// Binary cache keyed by (kernel hash, grid hash, n); load rejects mismatches.
void dump_pair_table(const PairTable& table, const std::string& path);
PairTable load_pair_table(const std::string& path, const TruncatedKernel& kernel,
                          std::shared_ptr<const SizeGrid> grid);

} // namespace growcoag
