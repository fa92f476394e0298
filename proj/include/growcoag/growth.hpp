#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <variant>

namespace growcoag {

struct ZeroGrowth {};
struct LinearGrowth {
    double a; // g = a v, 0 <= a
};
struct SaturatingGrowth {
    double a;
    double vstar; // g = a v vstar / (v + vstar)
};
struct UserGrowth {
    std::function<double(double, double)> rate; // (t, v) -> g
    std::string label = "user";
};

using GrowthFamily = std::variant<ZeroGrowth, LinearGrowth, SaturatingGrowth, UserGrowth>;

/// Volume growth speed g(t,v) with g(t,0) = 0, |d_v g| < A, |d^2_v g| < B.
struct GrowthField {
    GrowthFamily family;
    double A;
    double B;
};

GrowthField make_growth_field(GrowthFamily family, double A, double B);

double growth_rate(const GrowthField& field, double t, double v);

/// d_v g; analytic for the built-in families, centered difference for UserGrowth.
double growth_slope(const GrowthField& field, double t, double v);

struct FlowResult {
    double y;   // Y(s;t,v), volume at time s of the particle sized v at time t
    double jac; // J(s;t,v) = d_v Y, stored via its log so it stays positive
};

/// Integrates the characteristic ODE and its log-Jacobian from time t to s
/// with fixed-step RK4 (forward or backward).
FlowResult flow(const GrowthField& field, double s, double t, double v);

struct GrowthCheckReport {
    bool ok = false;
    bool origin_ok = false;      // g(t,0) = 0 on sampled t
    bool nonnegative_ok = false; // g >= 0 on samples
    double worst_slope = 0.0;
    double worst_curvature = 0.0;
    std::pair<double, double> worst_slope_at{};
    std::pair<double, double> worst_curvature_at{};
};

GrowthCheckReport
verify_growth_assumptions(const GrowthField& field,
                          std::span<const std::pair<double, double>> samples);

/// Default (t, v) sample set for the assumption check, including v near 0.
std::vector<std::pair<double, double>> growth_sample_grid();

struct FlowPropertyReport {
    bool ok = false;
    int trials = 0;
    int failures = 0;
    double worst_excess = 0.0; // largest relative violation seen
    std::string worst_case;
};

/// Randomized check of the flow inequalities (backward/forward exponential
/// bounds, speed bound, forward monotonicity) and the inverse identity.
FlowPropertyReport flow_property_suite(const GrowthField& field, int trials,
                                       std::uint64_t seed = 2026);

std::string to_text(const GrowthCheckReport& report);
std::string describe(const GrowthField& field);
std::uint64_t growth_hash(const GrowthField& field);

} // namespace growcoag
