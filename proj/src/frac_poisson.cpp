#include "martapprox/frac_poisson.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "martapprox/error.hpp"

namespace martapprox::frac {

BetaSeries beta_coefficients(std::size_t order) {
    if (order < 1) {
        throw Error(ErrorCode::InvalidInput, "beta_coefficients requires K >= 1");
    }
    BetaSeries s;
    s.order = order;
    s.beta.resize(order);
    s.beta[0] = 0.5;
    for (std::size_t k = 1; k < order; ++k) {
        const auto dk = static_cast<double>(k);
        s.beta[k] = s.beta[k - 1] * (dk - 0.5) / (dk + 1.0);
    }
    // Summing from the small end keeps the partial sum accurate for large K.
    double sum = 0.0;
    for (auto it = s.beta.rbegin(); it != s.beta.rend(); ++it) sum += *it;
    s.partial_sum = sum;
    s.tail_exact = beta_tail(order);
    s.tail_bound = 1.0 / std::sqrt(std::numbers::pi * static_cast<double>(order));
    return s;
}

double beta_tail(std::size_t order) {
    double t = 1.0;
    for (std::size_t k = 1; k <= order; ++k) {
        const auto dk = static_cast<double>(k);
        t *= (2.0 * dk - 1.0) / (2.0 * dk);
    }
    return t;
}

SqrtChainResult sqrt_apply_chain(const markov::StationaryChain& chain, const markov::Observable& h,
                                 const SqrtApplyOptions& opts) {
    if (!(opts.tol > 0.0)) {
        throw Error(ErrorCode::InvalidInput, "sqrt_apply_chain requires tol > 0");
    }
    const std::size_t window = std::max<std::size_t>(opts.ratio_window, 1);
    SqrtChainResult out;
    markov::Vector q = h.values();
    markov::Vector g = h.values();
    out.power_norms.push_back(std::sqrt(chain.norm_sq(q)));

    double beta = 0.5;  // beta_{K+1}
    double tail = 1.0;  // 1 - sum_{k<=K} beta_k
    std::size_t k = 0;
    while (true) {
        const double qn = out.power_norms.back();
        double ratio = 1.0;
        if (k >= window) {
            ratio = 0.0;
            for (std::size_t i = k - window; i < k; ++i) {
                const double prev = out.power_norms[i];
                ratio = std::max(ratio, prev > 0.0 ? out.power_norms[i + 1] / prev : 0.0);
            }
        }
        out.contraction_ratio = ratio;
        double err = qn * tail;
        if (ratio < 1.0) {
            err = std::min(err, beta * qn * ratio / (1.0 - ratio));
        }
        if (err <= opts.tol) {
            out.err_bound = err;
            break;
        }
        if (k >= opts.k_max) {
            std::ostringstream os;
            os << "sqrt(I-Q) series did not reach tol " << opts.tol << " within K_max = " << opts.k_max
               << "; remainder bound " << err << ", contraction ratio " << ratio << ", ||Q^k h|| trace:";
            const std::size_t first = out.power_norms.size() > 8 ? out.power_norms.size() - 8 : 0;
            for (std::size_t i = first; i < out.power_norms.size(); ++i) {
                os << " k=" << i << ":" << out.power_norms[i];
            }
            throw Error(ErrorCode::NoConvergence, os.str());
        }
        ++k;
        q = chain.q() * q;
        g -= beta * q;
        out.power_norms.push_back(std::sqrt(chain.norm_sq(q)));
        const auto dk = static_cast<double>(k);
        tail *= (2.0 * dk - 1.0) / (2.0 * dk);
        beta *= (dk - 0.5) / (dk + 1.0);
    }
    out.k_used = k;
    out.g = markov::unchecked_observable(std::move(g));
    return out;
}

double verify_square(const markov::StationaryChain& chain, const markov::Observable& h,
                     const SqrtApplyOptions& opts) {
    const auto once = sqrt_apply_chain(chain, h, opts);
    const auto twice = sqrt_apply_chain(chain, once.g, opts);
    const markov::Vector target = h.values() - chain.q() * h.values();
    return std::sqrt(chain.norm_sq(twice.g.values() - target));
}

SqrtSequenceResult sqrt_apply_sequence(const std::vector<double>& a, std::size_t j_max, std::size_t order,
                                       double a_tail_sup) {
    if (order < 1) {
        throw Error(ErrorCode::InvalidInput, "sqrt_apply_sequence requires K >= 1");
    }
    const std::size_t needed = j_max + order + 1;
    if (a.size() < needed) {
        std::ostringstream os;
        os << "need " << needed << " coefficients (j_max + K + 1), got " << a.size();
        throw Error(ErrorCode::InsufficientHorizon, os.str(), "a");
    }
    const auto series = beta_coefficients(order);
    SqrtSequenceResult out;
    out.order = order;
    out.beta_tail = series.tail_exact;
    out.c.resize(j_max + 1);

    // sup_{i > j} |a_i| and sup_{i > j} a_i over the supplied entries plus the tail.
    const double beyond = std::abs(a_tail_sup);
    std::vector<double> suffix_abs(a.size() + 1, beyond);
    std::vector<double> suffix_max(a.size() + 1, beyond);
    for (std::size_t i = a.size(); i-- > 0;) {
        suffix_abs[i] = std::max(suffix_abs[i + 1], std::abs(a[i]));
        suffix_max[i] = std::max(suffix_max[i + 1], a[i]);
    }

    out.lower_bound_certified = true;
    const double* beta = series.beta.data();
    for (std::size_t j = 0; j <= j_max; ++j) {
        const double aj = a[j];
        const double* ahead = a.data() + j + 1;
        double s = 0.0;
        for (std::size_t k = 0; k < order; ++k) {
            s += beta[k] * (aj - ahead[k]);
        }
        out.c[j] = s;
        out.trunc_error_bound =
            std::max(out.trunc_error_bound, series.tail_exact * (std::abs(aj) + suffix_abs[j + order + 1]));
        if (aj < suffix_max[j + 1]) out.lower_bound_certified = false;
    }
    return out;
}

SqrtSequenceResult sqrt_apply_sequence(const std::function<double(std::size_t)>& a, std::size_t j_max,
                                       std::size_t order, double a_tail_sup) {
    std::vector<double> values(j_max + order + 1);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = a(i);
    return sqrt_apply_sequence(values, j_max, order, a_tail_sup);
}

}  // namespace martapprox::frac
