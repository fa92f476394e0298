#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace growcoag {

/// Formats a double with 12 significant digits, '.' decimal separator.
std::string format_g12(double x);

/// FNV-1a 64-bit hash of a descriptor string.
std::uint64_t fnv1a64(std::string_view s);

std::string hex64(std::uint64_t h);

/// Thrown when a Picard window exhausts its iteration budget.
class NonconvergenceError : public std::runtime_error {
public:
    NonconvergenceError(std::string what, std::vector<double> residual_history)
        : std::runtime_error(std::move(what)), residuals(std::move(residual_history)) {}
    std::vector<double> residuals;
};

} // namespace growcoag
