#include "growcoag/kernels.hpp"
#include "growcoag/common.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace growcoag {

namespace {

void require_positive_pair(double v1, double v2) {
    if (!(v1 > 0.0) || !(v2 > 0.0))
        throw std::invalid_argument("kernel arguments must be positive volumes");
}

double family_rate(const KernelFamily& family, double v1, double v2) {
    return std::visit(
        [&](const auto& fam) -> double {
            using T = std::decay_t<decltype(fam)>;
            if constexpr (std::is_same_v<T, Smoluchowski>) {
                const double a = std::cbrt(v1), b = std::cbrt(v2);
                return (a + b) * (1.0 / a + 1.0 / b);
            } else if constexpr (std::is_same_v<T, Granulation>) {
                return std::pow(v1 + v2, fam.theta1) / std::pow(v1 * v2, fam.theta2);
            } else if constexpr (std::is_same_v<T, StirredFroth>) {
                return std::pow(v1 * v2, -fam.theta);
            } else if constexpr (std::is_same_v<T, ConstantKernel>) {
                return fam.kappa;
            } else {
                return fam.rate(v1, v2);
            }
        },
        family);
}

void validate_family(const KernelFamily& family) {
    if (const auto* g = std::get_if<Granulation>(&family)) {
        if (g->theta1 < 0.0 || g->theta1 > 1.0)
            throw std::invalid_argument("Granulation requires 0 <= theta1 <= 1");
        if (g->theta2 < 0.0)
            throw std::invalid_argument("Granulation requires theta2 >= 0");
    }
    if (const auto* f = std::get_if<StirredFroth>(&family)) {
        if (!(f->theta > 0.0))
            throw std::invalid_argument("StirredFroth requires theta > 0");
    }
    if (const auto* c = std::get_if<ConstantKernel>(&family)) {
        if (c->kappa < 0.0)
            throw std::invalid_argument("Constant kernel requires kappa >= 0");
    }
}

// Sampled sup of the rate over (1/n,n)^2: coarse log grid including the exact
// corners, then repeated zooming around the maximizer. Singular rates peak at
// corners, which the endpoint-inclusive scan hits exactly.
double sampled_sup(const KernelFamily& family, int n, int per_axis = 200, int refinements = 5) {
    double lo1 = 1.0 / n, hi1 = double(n);
    double lo2 = lo1, hi2 = hi1;
    double best = 0.0, bv1 = lo1, bv2 = lo2;
    for (int level = 0; level <= refinements; ++level) {
        const double la1 = std::log(lo1), lb1 = std::log(hi1);
        const double la2 = std::log(lo2), lb2 = std::log(hi2);
        for (int i = 0; i < per_axis; ++i) {
            const double v1 = std::exp(la1 + (lb1 - la1) * i / (per_axis - 1));
            for (int j = 0; j < per_axis; ++j) {
                const double v2 = std::exp(la2 + (lb2 - la2) * j / (per_axis - 1));
                const double r = family_rate(family, v1, v2);
                if (r > best) {
                    best = r;
                    bv1 = v1;
                    bv2 = v2;
                }
            }
        }
        // zoom on one grid spacing around the maximizer, clipped to the box
        const double h1 = (lb1 - la1) / (per_axis - 1);
        const double h2 = (lb2 - la2) / (per_axis - 1);
        lo1 = std::max(1.0 / n, bv1 * std::exp(-h1));
        hi1 = std::min(double(n), bv1 * std::exp(h1));
        lo2 = std::max(1.0 / n, bv2 * std::exp(-h2));
        hi2 = std::min(double(n), bv2 * std::exp(h2));
    }
    return best;
}

} // namespace

KernelSpec make_kernel(KernelFamily family, double beta, double k_env) {
    validate_family(family);
    if (!(beta > 0.0))
        throw std::invalid_argument("envelope exponent beta must be positive");
    if (!(k_env > 0.0))
        throw std::invalid_argument("envelope constant k_env must be positive");
    return KernelSpec{std::move(family), beta, k_env};
}

KernelSpec make_kernel(KernelFamily family) {
    validate_family(family);
    // Library defaults, obtained once by maximizing evaluate/envelope over a
    // dense regime-covering log grid. For these families the maximizer sits at
    // (1,1) and the value has a closed form.
    return std::visit(
        [&](const auto& fam) -> KernelSpec {
            using T = std::decay_t<decltype(fam)>;
            if constexpr (std::is_same_v<T, Smoluchowski>) {
                return KernelSpec{fam, 1.0 / 3.0, 4.0};
            } else if constexpr (std::is_same_v<T, Granulation>) {
                if (fam.theta2 == 0.0)
                    throw std::invalid_argument(
                        "Granulation with theta2 == 0 needs an explicit beta");
                return KernelSpec{fam, fam.theta2, std::pow(2.0, fam.theta1)};
            } else if constexpr (std::is_same_v<T, StirredFroth>) {
                return KernelSpec{fam, fam.theta, 1.0};
            } else if constexpr (std::is_same_v<T, ConstantKernel>) {
                return KernelSpec{fam, 0.25, std::max(fam.kappa, 1e-300)};
            } else {
                throw std::invalid_argument("user rate kernels need explicit (beta, k_env)");
            }
        },
        family);
}

double evaluate(const KernelSpec& spec, double v1, double v2) {
    require_positive_pair(v1, v2);
    const double r = family_rate(spec.family, v1, v2);
    if (!(r >= 0.0))
        throw std::invalid_argument("kernel rate must be nonnegative");
    return r;
}

double envelope_bound(const KernelSpec& spec, double v1, double v2) {
    require_positive_pair(v1, v2);
    const double beta = spec.beta;
    double bound;
    if (v1 < 1.0 && v2 < 1.0)
        bound = std::pow(v1 * v2, -beta);
    else if (v1 < 1.0) // v2 >= 1
        bound = v2 * std::pow(v1, -beta);
    else if (v2 < 1.0) // v1 >= 1
        bound = v1 * std::pow(v2, -beta);
    else
        bound = v1 + v2;
    return spec.k_env * bound;
}

EnvelopeReport verify_envelope(const KernelSpec& spec,
                               std::span<const std::pair<double, double>> sample) {
    EnvelopeReport report;
    report.samples = sample.size();
    for (const auto& [v1, v2] : sample) {
        const double ratio = evaluate(spec, v1, v2) / envelope_bound(spec, v1, v2);
        if (ratio > report.worst_ratio) {
            report.worst_ratio = ratio;
            report.witness = {v1, v2};
        }
    }
    report.ok = report.worst_ratio <= 1.0 + 1e-12;
    return report;
}

std::vector<std::pair<double, double>> envelope_sample_grid(double lo, double hi, int per_axis) {
    if (!(lo > 0.0) || !(hi > lo) || per_axis < 2)
        throw std::invalid_argument("envelope_sample_grid needs 0 < lo < hi, per_axis >= 2");
    std::vector<double> pts;
    pts.reserve(per_axis + 1);
    const double la = std::log(lo), lb = std::log(hi);
    for (int i = 0; i < per_axis; ++i)
        pts.push_back(std::exp(la + (lb - la) * i / (per_axis - 1)));
    if (lo < 1.0 && hi > 1.0 &&
        std::none_of(pts.begin(), pts.end(), [](double v) { return v == 1.0; }))
        pts.push_back(1.0); // the regime corner is the usual worst case
    std::vector<std::pair<double, double>> grid;
    grid.reserve(pts.size() * pts.size());
    for (double a : pts)
        for (double b : pts)
            grid.emplace_back(a, b);
    return grid;
}

std::string to_text(const EnvelopeReport& report) {
    std::ostringstream os;
    os << "ok = " << (report.ok ? "true" : "false") << '\n'
       << "worst_ratio = " << format_g12(report.worst_ratio) << '\n'
       << "witness_v1 = " << format_g12(report.witness[0]) << '\n'
       << "witness_v2 = " << format_g12(report.witness[1]) << '\n'
       << "samples = " << report.samples << '\n';
    return os.str();
}

double TruncatedKernel::evaluate_truncated(double v1, double v2) const {
    require_positive_pair(v1, v2);
    const double lo = 1.0 / n, hi = double(n);
    if (v1 <= lo || v1 >= hi || v2 <= lo || v2 >= hi)
        return 0.0;
    return evaluate(base, v1, v2);
}

double sup_truncated(const KernelSpec& spec, int n) {
    if (n < 2)
        throw std::invalid_argument("truncation index must satisfy n >= 2");
    const double lo = 1.0 / n, hi = double(n);
    return std::visit(
        [&](const auto& fam) -> double {
            using T = std::decay_t<decltype(fam)>;
            if constexpr (std::is_same_v<T, Smoluchowski>) {
                // increasing in the size ratio; corner (1/n, n)
                return 2.0 + std::pow(double(n), 2.0 / 3.0) + std::pow(double(n), -2.0 / 3.0);
            } else if constexpr (std::is_same_v<T, Granulation>) {
                // edge maxima are at corners for theta1 in [0,1]
                double best = 0.0;
                for (double a : {lo, hi})
                    for (double b : {lo, hi})
                        best = std::max(best, family_rate(spec.family, a, b));
                return best;
            } else if constexpr (std::is_same_v<T, StirredFroth>) {
                return std::pow(double(n), 2.0 * fam.theta); // corner (1/n, 1/n)
            } else if constexpr (std::is_same_v<T, ConstantKernel>) {
                return fam.kappa;
            } else {
                return sampled_sup(spec.family, n);
            }
        },
        spec.family);
}

TruncatedKernel truncate(const KernelSpec& spec, int n) {
    if (n < 2)
        throw std::invalid_argument("truncation index must satisfy n >= 2");
    return TruncatedKernel{spec, n, sup_truncated(spec, n)};
}

std::string describe(const KernelSpec& spec) {
    std::ostringstream os;
    std::visit(
        [&](const auto& fam) {
            using T = std::decay_t<decltype(fam)>;
            if constexpr (std::is_same_v<T, Smoluchowski>)
                os << "smoluchowski";
            else if constexpr (std::is_same_v<T, Granulation>)
                os << "granulation(" << format_g12(fam.theta1) << "," << format_g12(fam.theta2)
                   << ")";
            else if constexpr (std::is_same_v<T, StirredFroth>)
                os << "stirredfroth(" << format_g12(fam.theta) << ")";
            else if constexpr (std::is_same_v<T, ConstantKernel>)
                os << "constant(" << format_g12(fam.kappa) << ")";
            else
                os << "userrate(" << fam.label << ")";
        },
        spec.family);
    os << " beta=" << format_g12(spec.beta) << " k=" << format_g12(spec.k_env);
    return os.str();
}

std::uint64_t kernel_hash(const KernelSpec& spec) { return fnv1a64(describe(spec)); }

} // namespace growcoag
