#include "martapprox/bernoulli_shift.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "martapprox/error.hpp"

namespace martapprox::shift {
namespace {

constexpr std::int64_t kMaxFrequency = std::int64_t{1} << 61;

bool power_of_two(std::size_t n) { return n >= 1 && std::has_single_bit(n); }

}  // namespace

FourierObservable FourierObservable::make(std::map<std::int64_t, Complex> coeffs, bool real) {
    if (coeffs.contains(0)) {
        throw Error(ErrorCode::ZeroIndex, "frequency 0 is not allowed in a mean-zero observable", "coeffs[0]");
    }
    for (const auto& [r, c] : coeffs) {
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
            throw Error(ErrorCode::InvalidInput, "non-finite coefficient", "coeffs[" + std::to_string(r) + "]");
        }
        if (r > kMaxFrequency || r < -kMaxFrequency) {
            throw Error(ErrorCode::InvalidInput, "frequency out of range", "coeffs[" + std::to_string(r) + "]");
        }
    }
    if (real) {
        for (const auto& [r, c] : coeffs) {
            const auto it = coeffs.find(-r);
            const Complex mirror = it == coeffs.end() ? Complex{} : it->second;
            if (std::abs(mirror - std::conj(c)) > 1e-12) {
                throw Error(ErrorCode::InvalidInput,
                            "real observable requires c_{-r} = conj(c_r)", "coeffs[" + std::to_string(r) + "]");
            }
        }
    }
    FourierObservable g;
    g.coeffs_ = std::move(coeffs);
    g.real_ = real;
    return g;
}

double FourierObservable::norm_sq() const noexcept {
    double s = 0.0;
    for (const auto& [r, c] : coeffs_) s += std::norm(c);
    return s;
}

int FourierObservable::max_level() const noexcept {
    int level = -1;
    for (const auto& [r, c] : coeffs_) {
        if (c != Complex{}) level = std::max(level, static_cast<int>(dyadic_decompose(r).i));
    }
    return level;
}

DyadicIndex dyadic_decompose(std::int64_t r) {
    if (r == 0) throw Error(ErrorCode::ZeroIndex, "0 has no dyadic decomposition", "r");
    DyadicIndex d;
    d.i = static_cast<unsigned>(std::countr_zero(static_cast<std::uint64_t>(r)));
    d.j = r >> d.i;  // arithmetic shift keeps the sign; exact since the low bits are zero
    return d;
}

FourierObservable apply_q_fourier(const FourierObservable& g) {
    FourierObservable out;
    out.real_ = g.real_;
    for (const auto& [r, c] : g.coeffs_) {
        if (r % 2 == 0) out.coeffs_.emplace(r / 2, c);
    }
    return out;
}

FourierObservable apply_qstar_fourier(const FourierObservable& g) {
    FourierObservable out;
    out.real_ = g.real_;
    for (const auto& [r, c] : g.coeffs_) {
        if (r > kMaxFrequency / 2 || r < -kMaxFrequency / 2) {
            throw Error(ErrorCode::InvalidInput, "doubling frequency " + std::to_string(r) + " overflows",
                        "coeffs[" + std::to_string(r) + "]");
        }
        out.coeffs_.emplace(2 * r, c);
    }
    return out;
}

FourierCoeffArray to_coeff_array(const FourierObservable& g) {
    FourierCoeffArray out;
    const int level = g.max_level();
    for (const auto& [r, c] : g.coeffs()) {
        if (c == Complex{}) continue;
        const auto d = dyadic_decompose(r);
        auto& col = out.columns[d.j];
        col.resize(static_cast<std::size_t>(level + 1));
        col[d.i] = c;
        out.norm_sq += std::norm(c);
    }
    return out;
}

seq::CoeffArray FourierCoeffArray::realified() const {
    seq::CoeffArray arr;
    for (const auto& [j, col] : columns) {
        std::vector<double> re(col.size()), im(col.size());
        for (std::size_t i = 0; i < col.size(); ++i) {
            re[i] = col[i].real();
            im[i] = col[i].imag();
        }
        arr.push_back({std::to_string(j) + ".re", seq::CoeffSource::finite(std::move(re), "fourier")});
        arr.push_back({std::to_string(j) + ".im", seq::CoeffSource::finite(std::move(im), "fourier")});
    }
    return arr;
}

std::vector<Complex> sample(const FourierObservable& g, std::size_t grid_size) {
    if (grid_size < 1) throw Error(ErrorCode::GridTooCoarse, "empty grid", "grid_size");
    const auto n = static_cast<std::int64_t>(grid_size);
    std::vector<Complex> out(grid_size);
    for (const auto& [r, c] : g.coeffs()) {
        const std::int64_t rr = ((r % n) + n) % n;
        for (std::int64_t m = 0; m < n; ++m) {
            // (rr * m) mod n without overflow for n <= 2^31.
            const auto phase = static_cast<std::int64_t>((static_cast<unsigned __int128>(rr) * m) % n);
            const double angle = 2.0 * std::numbers::pi * static_cast<double>(phase) / static_cast<double>(n);
            out[static_cast<std::size_t>(m)] += c * Complex{std::cos(angle), std::sin(angle)};
        }
    }
    return out;
}

std::vector<Complex> apply_q_pointwise(const std::vector<Complex>& samples) {
    const std::size_t n = samples.size();
    if (n < 2 || !power_of_two(n)) {
        std::ostringstream os;
        os << "pointwise Q needs a power-of-two grid with at least 2 points, got " << n;
        throw Error(ErrorCode::GridTooCoarse, os.str(), "samples");
    }
    const std::size_t half = n / 2;
    std::vector<Complex> out(half);
    for (std::size_t m = 0; m < half; ++m) out[m] = 0.5 * (samples[m] + samples[m + half]);
    return out;
}

std::vector<Complex> apply_qstar_pointwise(const std::vector<Complex>& samples) {
    const std::size_t n = samples.size();
    if (n < 1 || !power_of_two(n)) {
        throw Error(ErrorCode::GridTooCoarse, "pointwise Q* needs a power-of-two grid", "samples");
    }
    std::vector<Complex> out(n);
    for (std::size_t m = 0; m < n; ++m) out[m] = samples[(2 * m) % n];
    return out;
}

seq::MAVerdict ma_verdict_bernoulli(const FourierObservable& g, std::size_t n_max, const seq::VerdictOptions& opts) {
    return seq::theorem1_verdict(to_coeff_array(g).realified(), n_max, opts);
}

}  // namespace martapprox::shift
