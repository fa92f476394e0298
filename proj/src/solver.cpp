#include "growcoag/solver.hpp"
#include "growcoag/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace growcoag {

double window_length(const TruncatedKernel& kernel_n, double m0_init,
                     std::optional<double> cap) {
    if (m0_init < 0.0)
        throw std::invalid_argument("window_length needs a nonnegative zeroth moment");
    const double rate = kernel_n.beta_n * m0_init;
    if (rate == 0.0)
        return cap.value_or(std::numeric_limits<double>::infinity());
    const double kappa = rate;
    double t = 1.0 / (2.0 * (kappa + 6.0 * rate));
    if (cap)
        t = std::min(t, *cap);
    return t;
}

Trajectory constant_trajectory(const DensityState& c_init, double t0, double t_window,
                               int substeps) {
    Trajectory u;
    u.times.resize(substeps + 1);
    u.states.resize(substeps + 1);
    for (int j = 0; j <= substeps; ++j) {
        u.times[j] = t0 + t_window * j / substeps;
        u.states[j] = c_init;
        u.states[j].time = u.times[j];
    }
    return u;
}

namespace {

// Product-integration weights for int f(s) e^{-kappa (t - s)} ds with f
// piecewise linear on the lattice: the damping factor is integrated exactly,
// so constant sources reproduce (1 - e^{-kappa t}) / kappa without drift.
// g_left weighs the segment's left node, g_right its right node, both times
// h e^{-kappa (t - s_right)}.
double seg_weight_left(double z) {
    if (z < 1e-3)
        return 0.5 - z / 3.0 + z * z / 8.0;
    return (1.0 - std::exp(-z) - z * std::exp(-z)) / (z * z);
}

double seg_weight_right(double z) {
    if (z < 1e-3)
        return 0.5 - z / 6.0 + z * z / 24.0;
    return (z - 1.0 + std::exp(-z)) / (z * z);
}

} // namespace

TnOperator::TnOperator(std::shared_ptr<const SizeGrid> grid, const GrowthField& field,
                       double t0, double t_window, int substeps, double kappa)
    : grid_(std::move(grid)), kappa_(kappa) {
    if (substeps < 1)
        throw std::invalid_argument("window needs at least one substep");
    if (!(t_window > 0.0))
        throw std::invalid_argument("window length must be positive");
    const int cells = grid_->cells();
    const auto centers = grid_->centers();
    times_.resize(substeps + 1);
    for (int j = 0; j <= substeps; ++j)
        times_[j] = t0 + t_window * j / substeps;
    const double dt = t_window / substeps;

    auto make_stencil = [&](double y, double jac, double damp) -> Stencil {
        Stencil st{0, 0.0, 0.0};
        if (y < grid_->vmin() || y > grid_->vmax())
            return st; // outside: density is zero there
        if (!(y > 0.0) || !(jac > 0.0))
            throw std::runtime_error("characteristic flow left the positive half-line");
        if (y <= centers[0]) {
            st.idx = 0;
            st.frac = 0.0;
        } else if (y >= centers[cells - 1]) {
            st.idx = cells - 2;
            st.frac = 1.0;
        } else {
            const auto it = std::upper_bound(centers.begin(), centers.end(), y);
            st.idx = static_cast<int>(it - centers.begin()) - 1;
            st.frac = std::log(y / centers[st.idx]) /
                      std::log(centers[st.idx + 1] / centers[st.idx]);
        }
        st.coef = jac * damp;
        return st;
    };

    const double z = kappa_ * dt;
    const double w_left = dt * seg_weight_left(z);
    const double w_right = dt * seg_weight_right(z);
    // damped source weight of lattice node i at target j, each adjacent
    // segment contributing with the damping taken at its right end
    auto source_weight = [&](int i, int j) {
        double w = 0.0;
        if (i < j)
            w += w_left * std::exp(-kappa_ * dt * (j - i - 1));
        if (i > 0)
            w += w_right * std::exp(-kappa_ * dt * (j - i));
        return w;
    };

    init_.resize(std::size_t(substeps) * cells);
    src_.resize(substeps);
    const int seg_steps = std::max(1, (int)std::ceil(field.A * dt * 256.0));
    for (int j = 1; j <= substeps; ++j) {
        src_[j - 1].assign(std::size_t(j + 1) * cells, Stencil{0, 0.0, 0.0});
        for (int c = 0; c < cells; ++c) {
            // integrate backward from times_[j] through the lattice, keeping
            // (Y, log J) at every intermediate lattice time
            double y = centers[c], L = 0.0;
            const double tau_j = times_[j] - t0;
            src_[j - 1][std::size_t(j) * cells + c] = make_stencil(y, 1.0, source_weight(j, j));
            for (int i = j - 1; i >= 0; --i) {
                const double h = (times_[i] - times_[i + 1]) / seg_steps; // negative
                double sigma = times_[i + 1];
                for (int step = 0; step < seg_steps; ++step) {
                    const double k1y = growth_rate(field, sigma, y);
                    const double k1l = growth_slope(field, sigma, y);
                    const double y2 = y + 0.5 * h * k1y;
                    const double k2y = growth_rate(field, sigma + 0.5 * h, y2);
                    const double k2l = growth_slope(field, sigma + 0.5 * h, y2);
                    const double y3 = y + 0.5 * h * k2y;
                    const double k3y = growth_rate(field, sigma + 0.5 * h, y3);
                    const double k3l = growth_slope(field, sigma + 0.5 * h, y3);
                    const double y4 = y + h * k3y;
                    const double k4y = growth_rate(field, sigma + h, y4);
                    const double k4l = growth_slope(field, sigma + h, y4);
                    y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
                    L += h / 6.0 * (k1l + 2.0 * k2l + 2.0 * k3l + k4l);
                    sigma = times_[i + 1] + (step + 1) * h;
                }
                const double jac = std::exp(L);
                src_[j - 1][std::size_t(i) * cells + c] =
                    make_stencil(y, jac, source_weight(i, j));
                if (i == 0)
                    init_[std::size_t(j - 1) * cells + c] =
                        make_stencil(y, jac, std::exp(-kappa_ * tau_j));
            }
        }
    }
}

Trajectory TnOperator::apply(const Trajectory& u, const DensityState& c_init,
                             const PairTable& table, double* clamped_number) const {
    const int substeps = static_cast<int>(times_.size()) - 1;
    const int cells = grid_->cells();
    if (u.states.size() != times_.size())
        throw std::invalid_argument("trajectory does not match the window lattice");
    if (c_init.grid.get() != grid_.get())
        throw std::invalid_argument("initial state grid mismatch");

    // kappa-shifted source on each lattice time
    std::vector<std::vector<double>> source(substeps + 1);
    for (int i = 0; i <= substeps; ++i) {
        const QnResult q = apply_Qn(u.states[i], table);
        source[i].resize(cells);
        for (int c = 0; c < cells; ++c)
            source[i][c] = q.rate[c] + kappa_ * u.states[i].values[c];
    }

    auto lerp = [&](const std::vector<double>& values, const Stencil& st) -> double {
        if (st.coef == 0.0)
            return 0.0;
        return (values[st.idx] * (1.0 - st.frac) + values[st.idx + 1] * st.frac) * st.coef;
    };

    Trajectory out;
    out.times = times_;
    out.states.resize(substeps + 1);
    out.states[0] = c_init;
    out.states[0].time = times_[0];
    double clamped = 0.0;
    for (int j = 1; j <= substeps; ++j) {
        DensityState next = zero_state(grid_, times_[j]);
        const auto& srcj = src_[j - 1];
        for (int c = 0; c < cells; ++c) {
            double val = lerp(c_init.values, init_[std::size_t(j - 1) * cells + c]);
            for (int i = 0; i <= j; ++i)
                val += lerp(source[i], srcj[std::size_t(i) * cells + c]);
            if (val < 0.0) {
                clamped += -val * grid_->width(c);
                val = 0.0;
            }
            next.values[c] = val;
        }
        out.states[j] = std::move(next);
    }
    if (clamped_number)
        *clamped_number = clamped;
    return out;
}

Trajectory apply_Tn(const Trajectory& u, const DensityState& c_init, const PairTable& table,
                    const GrowthField& field, double kappa_n, double* clamped_number) {
    if (u.times.size() < 2)
        throw std::invalid_argument("trajectory needs at least two lattice times");
    const double t0 = u.times.front();
    const double tw = u.times.back() - t0;
    TnOperator op(c_init.grid, field, t0, tw, static_cast<int>(u.times.size()) - 1, kappa_n);
    return op.apply(u, c_init, table, clamped_number);
}

namespace {

double sup_distance(const Trajectory& a, const Trajectory& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.states.size(); ++i)
        d = std::max(d, l1_distance(a.states[i], b.states[i]));
    return d;
}

} // namespace

std::pair<Trajectory, StepReport> picard_solve(const DensityState& c_init,
                                               const SolverConfig& cfg, const PairTable& table,
                                               const GrowthField& field, double t_window,
                                               double t_start, int window_index) {
    StepReport report;
    report.window_index = window_index;
    report.t_start = t_start;
    report.t_window = t_window;
    report.beta_n = table.kernel().beta_n;
    const double m0_init = moment(c_init, 0.0);
    report.kappa_n = table.kernel().beta_n * m0_init;

    TnOperator op(c_init.grid, field, t_start, t_window, cfg.substeps_per_window,
                  report.kappa_n);
    Trajectory u = constant_trajectory(c_init, t_start, t_window, cfg.substeps_per_window);

    for (int k = 1; k <= cfg.picard_max_iters; ++k) {
        double clamped = 0.0;
        Trajectory next = op.apply(u, c_init, table, &clamped);
        const double d = sup_distance(next, u);
        report.residuals.push_back(d);
        if (report.residuals.size() >= 2) {
            const double prev = report.residuals[report.residuals.size() - 2];
            report.contraction_ratios.push_back(prev > 0.0 ? d / prev : 0.0);
        }
        u = std::move(next);
        report.picard_iterations = k;
        report.final_residual = d;
        report.clamped_number = clamped;
        if (d <= cfg.picard_tol) {
            report.converged = true;
            break;
        }
    }
    if (!report.converged) {
        std::ostringstream os;
        os << "Picard iteration did not reach tol " << format_g12(cfg.picard_tol) << " in "
           << cfg.picard_max_iters << " iterations (last residual "
           << format_g12(report.final_residual) << ")";
        throw NonconvergenceError(os.str(), report.residuals);
    }

    // overflow ledger of the converged trajectory, trapezoid in time
    const double dt = t_window / cfg.substeps_per_window;
    for (int i = 0; i <= cfg.substeps_per_window; ++i) {
        const QnResult q = apply_Qn(u.states[i], table);
        const double w = (i == 0 || i == cfg.substeps_per_window) ? 0.5 * dt : dt;
        report.overflow_mass += w * q.overflow_mass_rate;
        report.overflow_number += w * q.overflow_number_rate;
    }

    // discrete membership in the invariant window set
    const double m1_init = moment(c_init, 1.0);
    const bool zero_growth = std::holds_alternative<ZeroGrowth>(field.family);
    const double m0_tol = zero_growth ? 1e-8 : 1e-4; // transport quadrature allowance
    for (int j = 0; j <= cfg.substeps_per_window; ++j) {
        const double tau = u.times[j] - t_start;
        if (moment(u.states[j], 0.0) > m0_init * (1.0 + m0_tol))
            report.pn_ok = false;
        if (moment(u.states[j], 1.0) > m1_init * std::exp(field.A * tau) * (1.0 + 1e-8))
            report.pn_ok = false;
    }
    return {std::move(u), std::move(report)};
}

namespace {

struct RowAccumulator {
    RowAccumulator(double beta_in, const GrowthField& field_in)
        : beta(beta_in), field(&field_in),
          m0_tol(std::holds_alternative<ZeroGrowth>(field_in.family) ? 1e-8 : 1e-4) {
        report.beta = beta_in;
    }
    double beta;
    const GrowthField* field;
    MomentReport report;
    double growth_integral = 0.0;
    double prev_growth_flux = 0.0;
    double prev_time = 0.0;
    double cumulative_overflow = 0.0;
    double m0_tol = 1e-8;

    void add(const DensityState& state, bool first) {
        MomentRow row;
        row.time = state.time;
        row.m_neg2beta = moment(state, -2.0 * beta);
        row.m0 = moment(state, 0.0);
        row.m1 = moment(state, 1.0);
        row.m2 = moment(state, 2.0);
        row.wnorm = moment(state, -beta) + row.m1;

        double flux = 0.0;
        const auto& grid = *state.grid;
        for (int i = 0; i < grid.cells(); ++i)
            flux += growth_rate(*field, state.time, grid.center(i)) * state.values[i] *
                    grid.width(i);
        if (!first)
            growth_integral += 0.5 * (state.time - prev_time) * (flux + prev_growth_flux);
        prev_growth_flux = flux;
        prev_time = state.time;

        for (double v : state.values)
            if (v < 0.0)
                report.nonneg_ok = false;

        if (!first) {
            const MomentRow& prev = report.rows.back();
            if (prev.m0 > 0.0) {
                const double inc = row.m0 / prev.m0 - 1.0;
                report.worst_m0_increase = std::max(report.worst_m0_increase, inc);
                if (inc > m0_tol)
                    report.m0_monotone_ok = false;
            }
            const MomentRow& head = report.rows.front();
            if (head.m1 > 0.0) {
                const double bound = head.m1 * std::exp(field->A * (row.time - head.time));
                const double excess = row.m1 / bound - 1.0;
                report.worst_m1_excess = std::max(report.worst_m1_excess, excess);
                if (excess > 1e-8)
                    report.m1_growth_ok = false;

                const double residual =
                    std::abs(row.m1 + cumulative_overflow - head.m1 - growth_integral) /
                    head.m1;
                report.worst_m1_balance = std::max(report.worst_m1_balance, residual);
                if (residual > 1e-4)
                    report.m1_balance_ok = false;
            }
            if (prev.m_neg2beta > 0.0) {
                const double inc = row.m_neg2beta / prev.m_neg2beta - 1.0;
                report.worst_mneg2beta_excess = std::max(report.worst_mneg2beta_excess, inc);
                if (inc > 1e-6)
                    report.mneg2beta_ok = false;
            }
        }
        report.max_m2 = std::max(report.max_m2, row.m2);
        report.rows.push_back(row);
    }
};

} // namespace

SolveResult solve(const DensityState& c0, const SolverConfig& cfg, const PairTable& table,
                  const GrowthField& field) {
    if (!(cfg.t_final > 0.0))
        throw std::invalid_argument("t_final must be positive");
    SolveResult result;
    RowAccumulator acc(table.kernel().base.beta, field);

    DensityState state = c0;
    state.time = 0.0;
    result.times.push_back(0.0);
    result.history.push_back(state);
    acc.add(state, true);

    double t = 0.0;
    int window_index = 0;
    const double t_eps = 1e-12 * std::max(1.0, cfg.t_final);
    while (t < cfg.t_final - t_eps) {
        const double m0 = moment(state, 0.0);
        double tw = window_length(table.kernel(), m0, cfg.window_cap);
        tw = std::min(tw, cfg.t_final - t);
        try {
            auto [traj, step] = picard_solve(state, cfg, table, field, tw, t, window_index);
            const double overflow_before = acc.report.total_overflow_mass;
            for (int j = 1; j < static_cast<int>(traj.states.size()); ++j) {
                result.times.push_back(traj.times[j]);
                result.history.push_back(traj.states[j]);
                acc.cumulative_overflow =
                    overflow_before + step.overflow_mass * double(j) / cfg.substeps_per_window;
                acc.add(traj.states[j], false);
            }
            acc.report.total_overflow_mass += step.overflow_mass;
            acc.report.total_clamped_number += step.clamped_number;
            state = traj.states.back();
            result.windows.push_back(std::move(step));
        } catch (const NonconvergenceError& err) {
            StepReport failed;
            failed.window_index = window_index;
            failed.t_start = t;
            failed.t_window = tw;
            failed.beta_n = table.kernel().beta_n;
            failed.kappa_n = table.kernel().beta_n * m0;
            failed.converged = false;
            failed.residuals = err.residuals;
            failed.picard_iterations = static_cast<int>(err.residuals.size());
            failed.final_residual = err.residuals.empty() ? 0.0 : err.residuals.back();
            result.windows.push_back(std::move(failed));
            result.moments = std::move(acc.report);
            result.completed = false;
            return result;
        }
        t = result.times.back();
        ++window_index;
    }
    result.completed = true;
    result.moments = std::move(acc.report);

    std::vector<double> wanted = cfg.output_times;
    if (wanted.empty())
        wanted.push_back(cfg.t_final);
    for (double target : wanted) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < result.times.size(); ++i)
            if (std::abs(result.times[i] - target) < std::abs(result.times[best] - target))
                best = i;
        result.output_times.push_back(result.times[best]);
        result.outputs.push_back(result.history[best]);
    }
    return result;
}

SolveResult solve(const DensityState& c0, const SolverConfig& cfg,
                  const TruncatedKernel& kernel_n, const GrowthField& field) {
    PairTable table = build_pair_table(kernel_n, c0.grid);
    return solve(c0, cfg, table, field);
}

} // namespace growcoag
