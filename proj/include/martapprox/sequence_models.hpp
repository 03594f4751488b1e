#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "martapprox/coeff_source.hpp"
#include "martapprox/frac_poisson.hpp"
#include "martapprox/slope.hpp"

/**
 * Coefficient-level analysis of causal linear processes X_k = sum_i a_i xi_{k-i}
 * and of superlinear processes (independent sums of such columns).
 *
 * Conventions: b_{-1} = 0, b_n = a_0 + ... + a_n, and
 *     bbar_n = (b_0 + b_1 + ... + b_{n-1}) / n,   n >= 1,
 * which is the coefficient of xi_1 in the kernel Hbar_n. With this indexing
 * the coboundary a = (1, -1) has bbar_n = 1/n. bbar[0] is stored as 0.
 */
namespace martapprox::seq {

struct CoeffSeq {
    std::vector<double> a;     ///< a_0..a_{n_max}
    std::vector<double> b;     ///< b_0..b_{n_max}
    std::vector<double> bbar;  ///< bbar_0 (= 0), bbar_1..bbar_{n_max}
    CoeffSource source;
    /// max_{1<=n<=n_max} |b_n| / sqrt(n); stays bounded for square-summable a.
    double max_b_over_sqrt_n = 0.0;

    std::size_t n_max() const noexcept { return b.empty() ? 0 : b.size() - 1; }
    /// b_n with b_{-1} = 0.
    double b_at(std::ptrdiff_t n) const { return n < 0 ? 0.0 : b.at(static_cast<std::size_t>(n)); }
};

/// Materializes a, b, bbar up to n_max with compensated summation.
/// Throws HorizonExceeded when the source cannot supply a_{n_max}.
CoeffSeq partial_sums(const CoeffSource& source, std::size_t n_max);

struct VnNorm {
    double value = 0.0;       ///< sum_{i=-1}^{i_max} (b_{i+n} - b_i)^2
    double tail_bound = 0.0;  ///< bound on the omitted i > i_max terms; +inf if not square summable
    bool certified = false;
};

/// ||V_n g||^2 for a linear process, truncated at i_max. Needs b up to
/// i_max + n (HorizonExceeded otherwise). The omitted terms are bounded by
/// n^2 sum_{i>i_max} a_i^2. Throws TailNotCertified when no bound is available.
VnNorm vn_norm_sq_linear(const CoeffSeq& seq, std::size_t n, std::size_t i_max);

/// Same sum; the tail bound is reported as NaN instead of throwing.
VnNorm vn_norm_sq_linear_raw(const CoeffSeq& seq, std::size_t n, std::size_t i_max);

/// E[S_n^2] for a linear process with unit-variance innovations:
/// sum_{m<n} b_m^2 + sum_{p=0}^{p_max} (b_{p+n} - b_p)^2, tail bounded as above.
VnNorm sn_second_moment_linear(const CoeffSeq& seq, std::size_t n, std::size_t p_max);

struct NormCondition {
    SlopeVerdict verdict;            ///< slope of log(sum / n) against log n, threshold 0
    std::vector<double> tail_bounds; ///< per grid point
    std::size_t i_max = 0;
};

/// Slope surrogate for (1/n) sum_i (b_{i+n} - b_i)^2 -> 0, i.e. ||V_n g||^2 = o(n).
NormCondition condition10_diagnostic(const CoeffSeq& seq, const std::vector<std::size_t>& n_grid,
                                     std::size_t i_max, double margin = kDefaultSlopeMargin);

inline constexpr double kDefaultCauchyTol = 1e-3;

struct CauchyCheck {
    std::size_t window_lo = 0;
    std::size_t window_hi = 0;
    /// For vectors the exact max pairwise distance lies between
    /// max_j range_j and sqrt(sum_j range_j^2); for scalars both are equal.
    double oscillation_lower = 0.0;
    double oscillation_upper = 0.0;
    double tol = kDefaultCauchyTol;
    Verdict verdict = Verdict::Inconclusive;  ///< Holds means "numerically Cauchy"
};

enum class Exists { Yes, No, Inconclusive };
std::string_view to_string(Exists e) noexcept;

struct MAVerdict {
    Exists exists = Exists::Inconclusive;
    std::optional<double> kappa_sq;
    std::string kappa_source;         ///< "lim b_n" or "lim bbar_n"
    NormCondition norm_condition;     ///< ||V_n g||^2 = o(n) surrogate
    CauchyCheck bbar_cauchy;
    CauchyCheck b_cauchy;
    double bbar_norm_sq_final = 0.0;  ///< ||bbar_{n_max}||^2
    std::size_t n_max = 0;
};

struct VerdictOptions {
    std::vector<std::size_t> grid;  ///< empty: dyadic 2^4 .. largest 2^e <= n_max / 8
    std::optional<std::size_t> i_max;  ///< default n_max - grid.back()
    double tol_cauchy = kDefaultCauchyTol;
    double margin = kDefaultSlopeMargin;
};

std::vector<std::size_t> default_grid(std::size_t n_max);

/// Single-column case. Equivalent to theorem1_verdict on a one-column array.
MAVerdict corollary2_verdict(const CoeffSource& source, std::size_t n_max, const VerdictOptions& opts = {});

struct CoeffColumn {
    std::string key;
    CoeffSource source;
};
using CoeffArray = std::vector<CoeffColumn>;

/// An element of l^2(J) for finite J.
struct L2JVector {
    std::map<std::string, double> entries;
    double norm_sq = 0.0;
};

struct SuperlinearBars {
    std::vector<std::string> keys;
    std::vector<CoeffSeq> columns;
    std::vector<double> b_norm_sq;     ///< ||b_n||^2, n = 0..n_max
    std::vector<double> bbar_norm_sq;  ///< ||bbar_n||^2

    std::size_t n_max() const noexcept { return b_norm_sq.empty() ? 0 : b_norm_sq.size() - 1; }
    L2JVector b(std::size_t n) const;
    L2JVector bbar(std::size_t n) const;
};

/// Columnwise partial sums. Explicit columns of unequal length raise RaggedColumns.
SuperlinearBars superlinear_bars(const CoeffArray& arr, std::size_t n_max);

/// l^2(J) analogue: (1/n) sum_i ||b_{i+n} - b_i||^2 -> 0.
/// Throws TailNotCertified when a column has no tail bound.
NormCondition condition13_diagnostic(const SuperlinearBars& bars, const std::vector<std::size_t>& n_grid,
                                     std::size_t i_max, double margin = kDefaultSlopeMargin);
NormCondition condition13_diagnostic(const CoeffArray& arr, const std::vector<std::size_t>& n_grid,
                                     std::size_t i_max, double margin = kDefaultSlopeMargin);

/**
 * Existence verdict for a superlinear process: yes iff the norm condition
 * holds and bbar_n is numerically Cauchy in l^2(J) over [n_max/2, n_max];
 * no iff either fails. kappa_sq = lim ||bbar_n||^2, evaluated as ||b_{n_max}||^2
 * when b_n itself is Cauchy and as ||bbar_{n_max}||^2 otherwise.
 */
MAVerdict theorem1_verdict(const CoeffArray& arr, std::size_t n_max, const VerdictOptions& opts = {});
MAVerdict theorem1_verdict(const SuperlinearBars& bars, const VerdictOptions& opts = {});

CauchyCheck cauchy_window(const std::vector<const std::vector<double>*>& columns, std::size_t n_max,
                          double tol);

struct Example5Report {
    CoeffSource a;
    CoeffSource c;               ///< data source over c_0..c_{j_max} with a certified tail
    frac::SqrtSequenceResult sqrt;
    std::size_t j_max = 0;
    std::optional<std::size_t> j0;  ///< first j >= 1 with c_i >= a_i/(9 sqrt i) for all i in [j, j_max]
    double min_ratio_after_j0 = 0.0;  ///< min c_j 9 sqrt(j) / a_j over [j0, j_max]
    std::optional<std::size_t> n0;  ///< b strictly increasing on [n0, j_max]
    std::vector<std::size_t> b_grid;
    std::vector<double> b_values;
    double b_100 = 0.0;
    double b_final = 0.0;
    /// max over 6 <= j <= j_max of (c_j + remainder) sqrt(pi (j+1)) / (3 a_j);
    /// the tail bound on c assumes this stays <= 1.
    double majorant_ratio = 0.0;
};

/// Builds a_j = 1/(sqrt(j+1) log(j+2)) and c = sqrt(I - shift) a truncated at K.
Example5Report example5_build(std::size_t j_max, std::size_t order);

/// Certified bound on sum_{j>N} c_j^2 for the coefficients built by example5_build.
double example5_c_tail_sq(std::size_t n);

struct Example6Report {
    CoeffArray arr;
    SuperlinearBars bars;
    std::vector<std::size_t> trace_grid;
    std::vector<double> bbar_minus_b0;  ///< bbar_{n,0} - b_{n,0}
    std::vector<double> bbar_minus_b1;
    std::vector<double> bbar_norm_sq;   ///< bbar_{n,0}^2 + bbar_{n,1}^2
    std::size_t stream_horizon = 0;
    double bbar0_min = 0.0;  ///< over 1 <= n <= stream_horizon
    double bbar0_max = 0.0;
    std::size_t bbar0_argmin = 0;
    std::size_t bbar0_argmax = 0;
    double max_abs_c_scaled = 0.0;  ///< max_{3<=t<=n_max} |c_t| t sqrt(log t)
    std::string convention_note;
};

/// Two-column array with b_{n,0} = cos(sqrt(log n)), b_{n,1} = sin(sqrt(log n))
/// for n >= 2 and b_{0,j} = b_{1,j} = 0. The bbar_{n,0} range is streamed up
/// to max(n_max, stream_horizon) without materializing.
Example6Report example6_build(std::size_t n_max, std::size_t stream_horizon = 0);

}  // namespace martapprox::seq
