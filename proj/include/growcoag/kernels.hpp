#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace growcoag {

using RateFn = std::function<double(double, double)>;

struct Smoluchowski {};
struct Granulation {
    double theta1; // sum exponent, <= 1 (and >= 0 here)
    double theta2; // product exponent, >= 0
};
struct StirredFroth {
    double theta; // > 0
};
struct ConstantKernel {
    double kappa; // >= 0
};
struct UserRateKernel {
    RateFn rate;
    std::string label = "user";
};

using KernelFamily =
    std::variant<Smoluchowski, Granulation, StirredFroth, ConstantKernel, UserRateKernel>;

/// A coagulation rate K(v1,v2) together with the exponent beta and constant
/// k_env of its three-regime singular envelope:
///   K <= k (v1 v2)^-beta          on (0,1)^2
///   K <= k v2 v1^-beta            on (0,1) x [1,inf)   (and symmetrically)
///   K <= k (v1 + v2)              on [1,inf)^2
struct KernelSpec {
    KernelFamily family;
    double beta;
    double k_env;
};

/// Builds a spec with the library default (beta, k_env) for the family.
/// Granulation with theta2 == 0 has no canonical beta; pass one explicitly.
KernelSpec make_kernel(KernelFamily family);
KernelSpec make_kernel(KernelFamily family, double beta, double k_env);

double evaluate(const KernelSpec& spec, double v1, double v2);

/// The envelope value k * (regime bound) at (v1,v2).
double envelope_bound(const KernelSpec& spec, double v1, double v2);

struct EnvelopeReport {
    bool ok = false;
    double worst_ratio = 0.0;          // max of evaluate/envelope over the sample
    std::array<double, 2> witness{};   // sample pair attaining worst_ratio
    std::size_t samples = 0;
};

EnvelopeReport verify_envelope(const KernelSpec& spec,
                               std::span<const std::pair<double, double>> sample);

/// Log-spaced sample covering all three envelope regimes; per_axis points on
/// [lo, hi] per axis, all pairs. Includes v = 1 exactly when the span allows.
std::vector<std::pair<double, double>> envelope_sample_grid(double lo, double hi, int per_axis);

std::string to_text(const EnvelopeReport& report);

struct TruncatedKernel {
    KernelSpec base;
    int n = 2;          // support restricted to (1/n, n) in each argument
    double beta_n = 0;  // sup of the truncated kernel

    double evaluate_truncated(double v1, double v2) const;
};

TruncatedKernel truncate(const KernelSpec& spec, int n);
double sup_truncated(const KernelSpec& spec, int n);

std::string describe(const KernelSpec& spec);
std::uint64_t kernel_hash(const KernelSpec& spec);

} // namespace growcoag
