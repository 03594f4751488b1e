#include "martapprox/slope.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "martapprox/error.hpp"

namespace martapprox {

std::string_view to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::Holds: return "holds";
        case Verdict::Fails: return "fails";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

SlopeVerdict fit_slope(const std::vector<double>& grid, const std::vector<double>& values,
                       double threshold, double margin, double zero_floor) {
    if (grid.size() != values.size()) {
        throw Error(ErrorCode::InvalidInput, "fit_slope: grid and values differ in length");
    }
    if (grid.size() < 2) {
        throw Error(ErrorCode::InvalidInput, "fit_slope: need at least two grid points");
    }
    SlopeVerdict out;
    out.grid = grid;
    out.values = values;
    out.threshold = threshold;
    out.margin = margin;

    out.all_zero = std::all_of(values.begin(), values.end(),
                               [&](double v) { return std::abs(v) <= zero_floor; });
    out.log_values.reserve(values.size());
    for (double v : values) {
        out.log_values.push_back(std::log(std::max(v, zero_floor)));
    }
    if (out.all_zero) {
        out.slope = -std::numeric_limits<double>::infinity();
        out.verdict = Verdict::Holds;
        return out;
    }

    const auto n = static_cast<double>(grid.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        mx += std::log(grid[i]);
        my += out.log_values[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double dx = std::log(grid[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (out.log_values[i] - my);
    }
    if (sxx <= 0.0) {
        throw Error(ErrorCode::InvalidInput, "fit_slope: grid has no spread");
    }
    out.slope = sxy / sxx;
    if (out.slope < threshold - margin) {
        out.verdict = Verdict::Holds;
    } else if (out.slope > threshold + margin) {
        out.verdict = Verdict::Fails;
    } else {
        out.verdict = Verdict::Inconclusive;
    }
    return out;
}

std::vector<std::size_t> dyadic_grid(unsigned lo, unsigned hi) {
    if (lo > hi || hi >= 63) {
        throw Error(ErrorCode::InvalidInput, "dyadic_grid: need lo <= hi < 63");
    }
    std::vector<std::size_t> out;
    for (unsigned e = lo; e <= hi; ++e) {
        out.push_back(std::size_t{1} << e);
    }
    return out;
}

bool is_dyadic_increasing(const std::vector<std::size_t>& grid) noexcept {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::has_single_bit(grid[i])) return false;
        if (i > 0 && grid[i] <= grid[i - 1]) return false;
    }
    return true;
}

}  // namespace martapprox
