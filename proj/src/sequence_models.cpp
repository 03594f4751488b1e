#include "martapprox/sequence_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "martapprox/detail/compensated.hpp"
#include "martapprox/error.hpp"

namespace martapprox::seq {
namespace {

using detail::CompensatedSum;

void require_dyadic(const std::vector<std::size_t>& grid, const char* what) {
    if (grid.size() < 2 || !is_dyadic_increasing(grid)) {
        throw Error(ErrorCode::InvalidInput,
                    std::string(what) + " grid must hold at least two increasing powers of two", "grid");
    }
}

std::vector<double> as_doubles(const std::vector<std::size_t>& grid) {
    return {grid.begin(), grid.end()};
}

VnNorm vn_sum(const CoeffSeq& seq, std::size_t n, std::size_t i_max) {
    if (n < 1) throw Error(ErrorCode::InvalidInput, "||V_n g|| requires n >= 1", "n");
    if (i_max + n > seq.n_max()) {
        std::ostringstream os;
        os << "||V_n g||^2 at n = " << n << ", i_max = " << i_max << " needs b up to " << i_max + n
           << ", materialized to " << seq.n_max();
        throw Error(ErrorCode::HorizonExceeded, os.str(), seq.source.name());
    }
    CompensatedSum s;
    const auto nn = static_cast<std::ptrdiff_t>(n);
    for (std::ptrdiff_t i = -1; i <= static_cast<std::ptrdiff_t>(i_max); ++i) {
        const double d = seq.b_at(i + nn) - seq.b_at(i);
        s.add(d * d);
    }
    VnNorm out;
    out.value = s.value();
    return out;
}

}  // namespace

std::string_view to_string(Exists e) noexcept {
    switch (e) {
        case Exists::Yes: return "yes";
        case Exists::No: return "no";
        case Exists::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

CoeffSeq partial_sums(const CoeffSource& source, std::size_t n_max) {
    CoeffSeq out{.a = source.take(n_max + 1), .b = {}, .bbar = {}, .source = source};
    out.b.resize(n_max + 1);
    out.bbar.assign(n_max + 1, 0.0);
    CompensatedSum b, bsum;
    for (std::size_t n = 0; n <= n_max; ++n) {
        if (n >= 1) {
            bsum.add(out.b[n - 1]);
            out.bbar[n] = bsum.value() / static_cast<double>(n);
        }
        b.add(out.a[n]);
        out.b[n] = b.value();
        const double scale = std::sqrt(static_cast<double>(std::max<std::size_t>(n, 1)));
        out.max_b_over_sqrt_n = std::max(out.max_b_over_sqrt_n, std::abs(out.b[n]) / scale);
    }
    return out;
}

VnNorm vn_norm_sq_linear_raw(const CoeffSeq& seq, std::size_t n, std::size_t i_max) {
    VnNorm out = vn_sum(seq, n, i_max);
    const auto tail = seq.source.tail_sq(i_max);
    if (!tail) {
        out.tail_bound = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    const auto dn = static_cast<double>(n);
    out.tail_bound = std::isinf(*tail) ? *tail : dn * dn * *tail;
    out.certified = std::isfinite(out.tail_bound);
    return out;
}

VnNorm vn_norm_sq_linear(const CoeffSeq& seq, std::size_t n, std::size_t i_max) {
    if (!seq.source.tail_sq(i_max)) {
        throw Error(ErrorCode::TailNotCertified,
                    "no bound on sum_{i>N} a_i^2 is available for '" + seq.source.name() +
                        "'; supply a generator or a finite array",
                    seq.source.name());
    }
    return vn_norm_sq_linear_raw(seq, n, i_max);
}

VnNorm sn_second_moment_linear(const CoeffSeq& seq, std::size_t n, std::size_t p_max) {
    VnNorm out = vn_norm_sq_linear_raw(seq, n, p_max);
    // The i = -1 term of the V_n sum is b_{n-1}^2; replace it by sum_{m<n} b_m^2.
    CompensatedSum s;
    s.add(out.value);
    s.add(-seq.b_at(static_cast<std::ptrdiff_t>(n) - 1) * seq.b_at(static_cast<std::ptrdiff_t>(n) - 1));
    for (std::size_t m = 0; m < n; ++m) s.add(seq.b[m] * seq.b[m]);
    out.value = s.value();
    return out;
}

NormCondition condition10_diagnostic(const CoeffSeq& seq, const std::vector<std::size_t>& n_grid,
                                     std::size_t i_max, double margin) {
    require_dyadic(n_grid, "condition10");
    NormCondition out;
    out.i_max = i_max;
    std::vector<double> values;
    for (std::size_t n : n_grid) {
        const auto v = vn_norm_sq_linear_raw(seq, n, i_max);
        values.push_back(v.value / static_cast<double>(n));
        out.tail_bounds.push_back(v.tail_bound);
    }
    out.verdict = fit_slope(as_doubles(n_grid), values, 0.0, margin);
    return out;
}

std::vector<std::size_t> default_grid(std::size_t n_max) {
    if (n_max < 4) {
        throw Error(ErrorCode::InvalidInput, "n_max must be at least 4 to form a diagnostic grid", "n_max");
    }
    const unsigned lo = n_max / 8 >= 32 ? 4 : 0;
    const std::size_t cap = lo == 4 ? n_max / 8 : n_max / 2;
    unsigned hi = lo;
    while ((std::size_t{1} << (hi + 1)) <= cap) ++hi;
    return dyadic_grid(lo, hi);
}

CauchyCheck cauchy_window(const std::vector<const std::vector<double>*>& columns, std::size_t n_max,
                          double tol) {
    CauchyCheck out;
    out.tol = tol;
    out.window_lo = std::max<std::size_t>(1, n_max / 2);
    out.window_hi = n_max;
    double sum_sq = 0.0;
    for (const auto* col : columns) {
        const auto first = col->begin() + static_cast<std::ptrdiff_t>(out.window_lo);
        const auto last = col->begin() + static_cast<std::ptrdiff_t>(out.window_hi) + 1;
        const auto [mn, mx] = std::minmax_element(first, last);
        const double range = *mx - *mn;
        out.oscillation_lower = std::max(out.oscillation_lower, range);
        sum_sq += range * range;
    }
    out.oscillation_upper = std::sqrt(sum_sq);
    if (out.oscillation_upper < tol) {
        out.verdict = Verdict::Holds;
    } else if (out.oscillation_lower > 10.0 * tol) {
        out.verdict = Verdict::Fails;
    } else {
        out.verdict = Verdict::Inconclusive;
    }
    return out;
}

L2JVector SuperlinearBars::b(std::size_t n) const {
    L2JVector v;
    for (std::size_t j = 0; j < keys.size(); ++j) v.entries[keys[j]] = columns[j].b.at(n);
    v.norm_sq = b_norm_sq.at(n);
    return v;
}

L2JVector SuperlinearBars::bbar(std::size_t n) const {
    L2JVector v;
    for (std::size_t j = 0; j < keys.size(); ++j) v.entries[keys[j]] = columns[j].bbar.at(n);
    v.norm_sq = bbar_norm_sq.at(n);
    return v;
}

SuperlinearBars superlinear_bars(const CoeffArray& arr, std::size_t n_max) {
    std::optional<std::size_t> horizon;
    for (const auto& col : arr) {
        const auto h = col.source.horizon();
        if (!h) continue;
        if (horizon && *horizon != *h) {
            std::ostringstream os;
            os << "column '" << col.key << "' has " << *h << " coefficients, expected " << *horizon;
            throw Error(ErrorCode::RaggedColumns, os.str(), "columns." + col.key);
        }
        horizon = h;
    }
    SuperlinearBars out;
    out.b_norm_sq.assign(n_max + 1, 0.0);
    out.bbar_norm_sq.assign(n_max + 1, 0.0);
    for (const auto& col : arr) {
        try {
            out.columns.push_back(partial_sums(col.source, n_max));
        } catch (const Error& e) {
            throw e.with_path_prefix("columns." + col.key);
        }
        out.keys.push_back(col.key);
        const auto& s = out.columns.back();
        for (std::size_t n = 0; n <= n_max; ++n) {
            out.b_norm_sq[n] += s.b[n] * s.b[n];
            out.bbar_norm_sq[n] += s.bbar[n] * s.bbar[n];
        }
    }
    return out;
}

NormCondition condition13_diagnostic(const SuperlinearBars& bars, const std::vector<std::size_t>& n_grid,
                                     std::size_t i_max, double margin) {
    require_dyadic(n_grid, "condition13");
    NormCondition out;
    out.i_max = i_max;
    std::vector<double> values;
    for (std::size_t n : n_grid) {
        double value = 0.0;
        double tail = 0.0;
        for (std::size_t j = 0; j < bars.columns.size(); ++j) {
            VnNorm v;
            try {
                v = vn_norm_sq_linear(bars.columns[j], n, i_max);
            } catch (const Error& e) {
                throw e.with_path_prefix("columns." + bars.keys[j]);
            }
            value += v.value;
            tail += v.tail_bound;
        }
        values.push_back(value / static_cast<double>(n));
        out.tail_bounds.push_back(tail);
    }
    out.verdict = fit_slope(as_doubles(n_grid), values, 0.0, margin);
    return out;
}

NormCondition condition13_diagnostic(const CoeffArray& arr, const std::vector<std::size_t>& n_grid,
                                     std::size_t i_max, double margin) {
    if (n_grid.empty()) throw Error(ErrorCode::InvalidInput, "empty grid", "grid");
    const std::size_t horizon = i_max + *std::max_element(n_grid.begin(), n_grid.end());
    return condition13_diagnostic(superlinear_bars(arr, horizon), n_grid, i_max, margin);
}

MAVerdict theorem1_verdict(const SuperlinearBars& bars, const VerdictOptions& opts) {
    const std::size_t n_max = bars.n_max();
    const auto grid = opts.grid.empty() ? default_grid(n_max) : opts.grid;
    require_dyadic(grid, "verdict");
    if (grid.back() > n_max) {
        throw Error(ErrorCode::InvalidInput, "grid exceeds n_max", "grid");
    }
    const std::size_t i_max = opts.i_max.value_or(n_max - grid.back());

    MAVerdict out;
    out.n_max = n_max;
    out.norm_condition = condition13_diagnostic(bars, grid, i_max, opts.margin);

    std::vector<const std::vector<double>*> bbar_cols, b_cols;
    for (const auto& c : bars.columns) {
        bbar_cols.push_back(&c.bbar);
        b_cols.push_back(&c.b);
    }
    out.bbar_cauchy = cauchy_window(bbar_cols, n_max, opts.tol_cauchy);
    out.b_cauchy = cauchy_window(b_cols, n_max, opts.tol_cauchy);
    out.bbar_norm_sq_final = bars.bbar_norm_sq[n_max];

    const Verdict norm = out.norm_condition.verdict.verdict;
    const Verdict conv = out.bbar_cauchy.verdict;
    if (norm == Verdict::Fails || conv == Verdict::Fails) {
        out.exists = Exists::No;
    } else if (norm == Verdict::Holds && conv == Verdict::Holds) {
        out.exists = Exists::Yes;
        if (out.b_cauchy.verdict == Verdict::Holds) {
            out.kappa_sq = bars.b_norm_sq[n_max];
            out.kappa_source = "lim b_n";
        } else {
            out.kappa_sq = bars.bbar_norm_sq[n_max];
            out.kappa_source = "lim bbar_n";
        }
    } else {
        out.exists = Exists::Inconclusive;
    }
    return out;
}

MAVerdict theorem1_verdict(const CoeffArray& arr, std::size_t n_max, const VerdictOptions& opts) {
    return theorem1_verdict(superlinear_bars(arr, n_max), opts);
}

MAVerdict corollary2_verdict(const CoeffSource& source, std::size_t n_max, const VerdictOptions& opts) {
    return theorem1_verdict(CoeffArray{{"0", source}}, n_max, opts);
}

double example5_c_tail_sq(std::size_t n) {
    // c_j <= 3 a_j / sqrt(pi (j+1)) for j >= 6, and c_j <= a_j always
    // (a is positive and decreasing, and the beta_k sum to one).
    const auto tail_from = [](std::size_t m) {  // sum_{j>m} c_j^2, m >= 5
        const auto dm = static_cast<double>(m);
        const double l = std::log(dm + 2.0);
        return 9.0 / (std::numbers::pi * l * l * (dm + 1.0));
    };
    if (n >= 5) return tail_from(n);
    const auto a = CoeffSource::example5();
    double s = tail_from(5);
    for (std::size_t j = n + 1; j <= 5; ++j) s += a.at(j) * a.at(j);
    return s;
}

Example5Report example5_build(std::size_t j_max, std::size_t order) {
    if (j_max < 1) throw Error(ErrorCode::InvalidInput, "example5_build requires j_max >= 1", "j_max");
    Example5Report out;
    out.a = CoeffSource::example5();
    out.j_max = j_max;
    const std::size_t needed = j_max + order + 1;
    const auto a = out.a.take(needed);
    out.sqrt = frac::sqrt_apply_sequence(a, j_max, order, out.a.at(needed));
    const auto& c = out.sqrt.c;
    out.c = CoeffSource::data(c, example5_c_tail_sq, "example5_c");

    const auto lower = [&](std::size_t j) { return a[j] / (9.0 * std::sqrt(static_cast<double>(j))); };
    if (c[j_max] >= lower(j_max)) {
        std::size_t j0 = j_max;
        while (j0 > 1 && c[j0 - 1] >= lower(j0 - 1)) --j0;
        out.j0 = j0;
        out.min_ratio_after_j0 = std::numeric_limits<double>::infinity();
        for (std::size_t j = j0; j <= j_max; ++j) {
            out.min_ratio_after_j0 = std::min(out.min_ratio_after_j0, c[j] / lower(j));
        }
    }
    if (c[j_max] > 0.0) {
        std::size_t n0 = j_max;
        while (n0 > 0 && c[n0] > 0.0) --n0;
        out.n0 = n0;
    }

    std::vector<double> b(j_max + 1);
    CompensatedSum s;
    for (std::size_t j = 0; j <= j_max; ++j) {
        s.add(c[j]);
        b[j] = s.value();
    }
    for (std::size_t n = 1; n <= j_max; n *= 2) out.b_grid.push_back(n);
    if (out.b_grid.back() != j_max) out.b_grid.push_back(j_max);
    for (std::size_t n : out.b_grid) out.b_values.push_back(b[n]);
    out.b_100 = j_max >= 100 ? b[100] : std::numeric_limits<double>::quiet_NaN();
    out.b_final = b[j_max];

    for (std::size_t j = 6; j <= j_max; ++j) {
        const double upper = c[j] + out.sqrt.beta_tail * a[j];
        const double ratio = upper * std::sqrt(std::numbers::pi * static_cast<double>(j + 1)) / (3.0 * a[j]);
        out.majorant_ratio = std::max(out.majorant_ratio, ratio);
    }
    return out;
}

Example6Report example6_build(std::size_t n_max, std::size_t stream_horizon) {
    if (n_max < 4) throw Error(ErrorCode::InvalidInput, "example6_build requires n_max >= 4", "n_max");
    Example6Report out;
    out.arr = {{"0", CoeffSource::example6_column(0)}, {"1", CoeffSource::example6_column(1)}};
    out.bars = superlinear_bars(out.arr, n_max);
    out.convention_note =
        "b_{0,j} = b_{1,j} = 0 (first two coefficients set to zero); the cos/sin formula applies from n = 2";

    for (std::size_t n = 2; n <= n_max; n *= 2) out.trace_grid.push_back(n);
    if (out.trace_grid.back() != n_max) out.trace_grid.push_back(n_max);
    const auto& c0 = out.bars.columns[0];
    const auto& c1 = out.bars.columns[1];
    for (std::size_t n : out.trace_grid) {
        out.bbar_minus_b0.push_back(c0.bbar[n] - c0.b[n]);
        out.bbar_minus_b1.push_back(c1.bbar[n] - c1.b[n]);
        out.bbar_norm_sq.push_back(out.bars.bbar_norm_sq[n]);
    }
    for (std::size_t t = 3; t <= n_max; ++t) {
        const auto dt = static_cast<double>(t);
        const double scale = dt * std::sqrt(std::log(dt));
        out.max_abs_c_scaled =
            std::max({out.max_abs_c_scaled, std::abs(c0.a[t]) * scale, std::abs(c1.a[t]) * scale});
    }

    // Streamed range of bbar_{n,0}: running compensated sum of b_{k,0}, k < n.
    out.stream_horizon = std::max(n_max, stream_horizon);
    out.bbar0_min = std::numeric_limits<double>::infinity();
    out.bbar0_max = -std::numeric_limits<double>::infinity();
    CompensatedSum s;
    for (std::size_t n = 1; n <= out.stream_horizon; ++n) {
        s.add(example6_partial_sum(0, n - 1));
        const double v = s.value() / static_cast<double>(n);
        if (v < out.bbar0_min) {
            out.bbar0_min = v;
            out.bbar0_argmin = n;
        }
        if (v > out.bbar0_max) {
            out.bbar0_max = v;
            out.bbar0_argmax = n;
        }
    }
    return out;
}

}  // namespace martapprox::seq
