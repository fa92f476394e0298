#include "growcoag/growth.hpp"
#include "growcoag/common.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace growcoag {

namespace {

double family_rate(const GrowthFamily& family, double t, double v) {
    return std::visit(
        [&](const auto& fam) -> double {
            using T = std::decay_t<decltype(fam)>;
            if constexpr (std::is_same_v<T, ZeroGrowth>)
                return 0.0;
            else if constexpr (std::is_same_v<T, LinearGrowth>)
                return fam.a * v;
            else if constexpr (std::is_same_v<T, SaturatingGrowth>)
                return fam.a * v * fam.vstar / (v + fam.vstar);
            else
                return fam.rate(t, v);
        },
        family);
}

double family_slope(const GrowthFamily& family, double t, double v) {
    return std::visit(
        [&](const auto& fam) -> double {
            using T = std::decay_t<decltype(fam)>;
            if constexpr (std::is_same_v<T, ZeroGrowth>)
                return 0.0;
            else if constexpr (std::is_same_v<T, LinearGrowth>)
                return fam.a;
            else if constexpr (std::is_same_v<T, SaturatingGrowth>) {
                const double d = v + fam.vstar;
                return fam.a * fam.vstar * fam.vstar / (d * d);
            } else {
                const double h = 1e-6 * std::max(std::abs(v), 1.0);
                const double vm = std::max(v - h, 0.0);
                return (fam.rate(t, v + h) - fam.rate(t, vm)) / (v + h - vm);
            }
        },
        family);
}

} // namespace

GrowthField make_growth_field(GrowthFamily family, double A, double B) {
    if (!(A > 0.0) || !(B > 0.0))
        throw std::invalid_argument("growth bounds A, B must be positive");
    // a = A is constructible (tight-bound fields); the assumption checker is
    // the one that rejects slopes reaching A, the bounds being strict there
    if (const auto* lin = std::get_if<LinearGrowth>(&family)) {
        if (lin->a < 0.0 || lin->a > A)
            throw std::invalid_argument("linear growth requires 0 <= a <= A");
    }
    if (const auto* sat = std::get_if<SaturatingGrowth>(&family)) {
        if (sat->a < 0.0 || sat->a > A || !(sat->vstar > 0.0))
            throw std::invalid_argument("saturating growth requires 0 <= a <= A, vstar > 0");
    }
    return GrowthField{std::move(family), A, B};
}

double growth_rate(const GrowthField& field, double t, double v) {
    return family_rate(field.family, t, v);
}

double growth_slope(const GrowthField& field, double t, double v) {
    return family_slope(field.family, t, v);
}

FlowResult flow(const GrowthField& field, double s, double t, double v) {
    if (!(v > 0.0))
        throw std::invalid_argument("flow requires a positive starting volume");
    if (s < 0.0 || t < 0.0)
        throw std::invalid_argument("flow requires nonnegative times");
    const double span = s - t;
    if (span == 0.0)
        return FlowResult{v, 1.0};
    // Step so that A*|h| stays small; RK4 then resolves the exponential
    // bounds to ~1e-12, well inside the tolerances used downstream.
    const int nsteps = std::max(1, (int)std::ceil(std::abs(span) * field.A * 256.0));
    const double h = span / nsteps;
    double y = v, L = 0.0;
    double sigma = t;
    for (int i = 0; i < nsteps; ++i) {
        const double k1y = family_rate(field.family, sigma, y);
        const double k1l = family_slope(field.family, sigma, y);
        const double y2 = y + 0.5 * h * k1y;
        const double k2y = family_rate(field.family, sigma + 0.5 * h, y2);
        const double k2l = family_slope(field.family, sigma + 0.5 * h, y2);
        const double y3 = y + 0.5 * h * k2y;
        const double k3y = family_rate(field.family, sigma + 0.5 * h, y3);
        const double k3l = family_slope(field.family, sigma + 0.5 * h, y3);
        const double y4 = y + h * k3y;
        const double k4y = family_rate(field.family, sigma + h, y4);
        const double k4l = family_slope(field.family, sigma + h, y4);
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        L += h / 6.0 * (k1l + 2.0 * k2l + 2.0 * k3l + k4l);
        sigma = t + (i + 1) * h;
    }
    return FlowResult{y, std::exp(L)};
}

std::vector<std::pair<double, double>> growth_sample_grid() {
    std::vector<std::pair<double, double>> samples;
    const double times[] = {0.0, 0.3, 1.0, 2.5};
    for (double t : times) {
        samples.emplace_back(t, 0.0);
        for (int i = -50; i <= 40; ++i)
            samples.emplace_back(t, std::pow(10.0, 0.1 * i));
    }
    return samples;
}

GrowthCheckReport
verify_growth_assumptions(const GrowthField& field,
                          std::span<const std::pair<double, double>> samples) {
    GrowthCheckReport report;
    report.origin_ok = true;
    report.nonnegative_ok = true;
    const double margin = 1e-12; // the bounds are strict inequalities
    for (const auto& [t, v] : samples) {
        const double g = family_rate(field.family, t, v);
        if (v == 0.0) {
            if (g != 0.0)
                report.origin_ok = false;
            continue;
        }
        if (g < 0.0)
            report.nonnegative_ok = false;
        const double h = 1e-5 * std::max(v, 1.0);
        const double vm = std::max(v - h, 0.0);
        const double gp = family_rate(field.family, t, v + h);
        const double gm = family_rate(field.family, t, vm);
        const double slope = std::abs((gp - gm) / (v + h - vm));
        if (slope > report.worst_slope) {
            report.worst_slope = slope;
            report.worst_slope_at = {t, v};
        }
        const double curv = std::abs((gp - 2.0 * g + gm) / (h * h));
        if (curv > report.worst_curvature) {
            report.worst_curvature = curv;
            report.worst_curvature_at = {t, v};
        }
    }
    report.ok = report.origin_ok && report.nonnegative_ok &&
                report.worst_slope <= field.A - margin &&
                report.worst_curvature <= field.B - margin;
    return report;
}

FlowPropertyReport flow_property_suite(const GrowthField& field, int trials, std::uint64_t seed) {
    FlowPropertyReport report;
    report.trials = trials;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> utime(0.0, 3.0);
    std::uniform_real_distribution<double> ulogv(std::log(1e-3), std::log(1e3));
    const double rtol = 1e-6;

    auto record = [&](double excess, const char* what, double s, double t, double v) {
        if (excess > rtol)
            ++report.failures;
        if (excess > report.worst_excess) {
            report.worst_excess = excess;
            std::ostringstream os;
            os << what << " at s=" << format_g12(s) << " t=" << format_g12(t)
               << " v=" << format_g12(v);
            report.worst_case = os.str();
        }
    };

    for (int trial = 0; trial < trials; ++trial) {
        const double v = std::exp(ulogv(rng));
        double t = utime(rng);
        double s1 = utime(rng) * t / 3.0;
        double s2 = utime(rng) * t / 3.0;
        if (s1 > s2)
            std::swap(s1, s2);

        // backward monotone bound: Y(s2;t,v) <= Y(s1;t,v) e^{A (s2-s1)}
        const auto ys1 = flow(field, s1, t, v);
        const auto ys2 = flow(field, s2, t, v);
        if (!(ys1.y > 0.0) || !(ys2.y > 0.0))
            ++report.failures;
        record(ys2.y / (ys1.y * std::exp(field.A * (s2 - s1))) - 1.0, "backward bound", s2, t, v);

        // forward bound and forward monotonicity
        const double sf = t + utime(rng);
        const auto yf = flow(field, sf, t, v);
        record(yf.y / (v * std::exp(field.A * (sf - t))) - 1.0, "forward bound", sf, t, v);
        record(v / yf.y - 1.0, "forward monotonicity", sf, t, v);

        // speed bound along the flow started at time 0
        const double ss = utime(rng);
        const auto y0 = flow(field, ss, 0.0, v);
        const double g = std::abs(growth_rate(field, ss, y0.y));
        record(g / (field.A * v * std::exp(field.A * ss)) - 1.0, "speed bound", ss, 0.0, v);

        // inverse identity Y(t; s, Y(s;t,v)) = v
        const auto back = flow(field, t, s1, flow(field, s1, t, v).y);
        record(std::abs(back.y - v) / std::max(v, 1.0), "inverse identity", s1, t, v);
    }
    report.ok = report.failures == 0;
    return report;
}

std::string to_text(const GrowthCheckReport& report) {
    std::ostringstream os;
    os << "ok = " << (report.ok ? "true" : "false") << '\n'
       << "origin_ok = " << (report.origin_ok ? "true" : "false") << '\n'
       << "nonnegative_ok = " << (report.nonnegative_ok ? "true" : "false") << '\n'
       << "worst_slope = " << format_g12(report.worst_slope) << '\n'
       << "worst_slope_t = " << format_g12(report.worst_slope_at.first) << '\n'
       << "worst_slope_v = " << format_g12(report.worst_slope_at.second) << '\n'
       << "worst_curvature = " << format_g12(report.worst_curvature) << '\n'
       << "worst_curvature_t = " << format_g12(report.worst_curvature_at.first) << '\n'
       << "worst_curvature_v = " << format_g12(report.worst_curvature_at.second) << '\n';
    return os.str();
}

std::string describe(const GrowthField& field) {
    std::ostringstream os;
    std::visit(
        [&](const auto& fam) {
            using T = std::decay_t<decltype(fam)>;
            if constexpr (std::is_same_v<T, ZeroGrowth>)
                os << "zero";
            else if constexpr (std::is_same_v<T, LinearGrowth>)
                os << "linear(" << format_g12(fam.a) << ")";
            else if constexpr (std::is_same_v<T, SaturatingGrowth>)
                os << "saturating(" << format_g12(fam.a) << "," << format_g12(fam.vstar) << ")";
            else
                os << "usergrowth(" << fam.label << ")";
        },
        field.family);
    os << " A=" << format_g12(field.A) << " B=" << format_g12(field.B);
    return os.str();
}

std::uint64_t growth_hash(const GrowthField& field) { return fnv1a64(describe(field)); }

} // namespace growcoag
