#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace martapprox {

enum class Verdict { Holds, Fails, Inconclusive };

std::string_view to_string(Verdict v) noexcept;

/**
 * @brief Finite-horizon surrogate for an asymptotic rate condition.
 *
 * The least-squares slope of log(value) against log(n) is compared with a
 * threshold: `Holds` iff slope < threshold - margin, `Fails` iff
 * slope > threshold + margin, `Inconclusive` otherwise. A sequence that is
 * identically zero (every value <= zero_floor) holds trivially and is
 * reported with slope = -infinity.
 */
struct SlopeVerdict {
    std::vector<double> grid;
    std::vector<double> values;
    std::vector<double> log_values;
    double slope = 0.0;
    double threshold = 0.0;
    double margin = 0.1;
    Verdict verdict = Verdict::Inconclusive;
    bool all_zero = false;
};

inline constexpr double kDefaultSlopeMargin = 0.1;

SlopeVerdict fit_slope(const std::vector<double>& grid, const std::vector<double>& values,
                       double threshold, double margin = kDefaultSlopeMargin,
                       double zero_floor = 1e-300);

/// Powers of two 2^lo, ..., 2^hi.
std::vector<std::size_t> dyadic_grid(unsigned lo, unsigned hi);

/// True when every entry is a power of two and the sequence strictly increases.
bool is_dyadic_increasing(const std::vector<std::size_t>& grid) noexcept;

}  // namespace martapprox
