#pragma once

#include <optional>
#include <vector>

#include "growcoag/coag_op.hpp"
#include "growcoag/common.hpp"
#include "growcoag/growth.hpp"

namespace growcoag {

struct SolverConfig {
    int substeps_per_window = 8;
    double picard_tol = 1e-10; // absolute, sup-in-time L1 distance
    int picard_max_iters = 60;
    double t_final = 1.0;
    // Windows are min(contraction window, cap). The cap bounds the transport
    // error per window and is the whole window for kernels with beta_n = 0.
    std::optional<double> window_cap = 0.25;
    std::vector<double> output_times; // snapped to the substep lattice; empty = {t_final}
};

/// Contraction window 1 / (2 (kappa_n + 6 beta_n M0)) with kappa_n = beta_n M0,
/// i.e. 1 / (14 beta_n M0); capped, and the cap alone when beta_n M0 == 0.
double window_length(const TruncatedKernel& kernel_n, double m0_init,
                     std::optional<double> cap);

/// Time-sampled states on one window's substep lattice (global times).
struct Trajectory {
    std::vector<double> times;
    std::vector<DensityState> states;
};

Trajectory constant_trajectory(const DensityState& c_init, double t0, double t_window,
                               int substeps);

/// One application of the damped Duhamel update: transport of the window's
/// initial state plus the time-integrated, kappa-shifted coagulation source,
/// all pulled back along the characteristics.
class TnOperator {
public:
    TnOperator(std::shared_ptr<const SizeGrid> grid, const GrowthField& field, double t0,
               double t_window, int substeps, double kappa);

    const std::vector<double>& times() const { return times_; }
    double kappa() const { return kappa_; }

    Trajectory apply(const Trajectory& u, const DensityState& c_init, const PairTable& table,
                     double* clamped_number = nullptr) const;

private:
    struct Stencil {
        int idx;     // left interpolation cell
        double frac; // log-space weight toward idx+1
        double coef; // jacobian * damping (* trapezoid weight for source terms)
    };
    std::shared_ptr<const SizeGrid> grid_;
    std::vector<double> times_; // global lattice t0 .. t0 + t_window
    double kappa_;
    // stencils laid out per target index j >= 1: initial pullback, then one
    // source stencil per lattice time i <= j
    std::vector<Stencil> init_;            // [(j-1) * cells + c]
    std::vector<std::vector<Stencil>> src_; // src_[j-1][i * cells + c]
};

Trajectory apply_Tn(const Trajectory& u, const DensityState& c_init, const PairTable& table,
                    const GrowthField& field, double kappa_n,
                    double* clamped_number = nullptr);

struct StepReport {
    int window_index = 0;
    double t_start = 0;
    double t_window = 0;
    double kappa_n = 0;
    double beta_n = 0;
    bool converged = false;
    int picard_iterations = 0;
    double final_residual = 0;
    std::vector<double> residuals;          // sup-in-time L1 distance per iteration
    std::vector<double> contraction_ratios; // residual[k] / residual[k-1]
    double clamped_number = 0;              // negative mass clamped to zero
    double overflow_mass = 0;               // first moment routed past vmax
    double overflow_number = 0;
    bool pn_ok = true; // discrete membership in the invariant set
};

std::pair<Trajectory, StepReport> picard_solve(const DensityState& c_init,
                                               const SolverConfig& cfg,
                                               const PairTable& table,
                                               const GrowthField& field, double t_window,
                                               double t_start = 0.0, int window_index = 0);

struct MomentRow {
    double time;
    double m_neg2beta, m0, m1, m2;
    double wnorm; // (v^-beta + v)-weighted norm of the state itself
};

struct MomentReport {
    double beta = 0;
    std::vector<MomentRow> rows;
    bool nonneg_ok = true;
    bool m0_monotone_ok = true;
    double worst_m0_increase = 0; // relative, consecutive rows
    bool m1_growth_ok = true;
    double worst_m1_excess = 0; // relative to e^{At} M1(0)
    bool m1_balance_ok = true;
    double worst_m1_balance = 0; // relative to M1(0)
    bool mneg2beta_ok = true;
    double worst_mneg2beta_excess = 0;
    double max_m2 = 0;
    double total_clamped_number = 0;
    double total_overflow_mass = 0;
    bool all_ok() const {
        return nonneg_ok && m0_monotone_ok && m1_growth_ok && m1_balance_ok && mneg2beta_ok;
    }
};

struct SolveResult {
    bool completed = false; // false when a window failed to converge
    std::vector<double> times;
    std::vector<DensityState> history; // one state per lattice time
    std::vector<double> output_times;
    std::vector<DensityState> outputs;
    std::vector<StepReport> windows;
    MomentReport moments;
};

/// Chains Picard windows to t_final, recomputing the window length from the
/// current zeroth moment, and records the moment history with invariant flags.
SolveResult solve(const DensityState& c0, const SolverConfig& cfg,
                  const TruncatedKernel& kernel_n, const GrowthField& field);
SolveResult solve(const DensityState& c0, const SolverConfig& cfg, const PairTable& table,
                  const GrowthField& field);

} // namespace growcoag
