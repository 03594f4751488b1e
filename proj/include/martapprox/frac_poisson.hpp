#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "martapprox/markov_core.hpp"

namespace martapprox::frac {

/**
 * @brief Coefficients of sqrt(1 - t) = 1 - sum_{k>=1} beta_k t^k, truncated at K.
 *
 * beta_k = (-1)^{k-1} binom(1/2, k) is positive, decreasing and sums to one.
 * The exact remainder 1 - sum_{k<=K} beta_k equals binom(2K, K) / 4^K and
 * is tracked alongside the majorant 1/sqrt(pi K).
 */
struct BetaSeries {
    std::size_t order = 0;      ///< K
    std::vector<double> beta;   ///< beta[k-1] = beta_k, k = 1..K
    double partial_sum = 0.0;   ///< sum_{k<=K} beta_k
    double tail_exact = 1.0;    ///< 1 - sum_{k<=K} beta_k via binom(2K,K)/4^K
    double tail_bound = 1.0;    ///< 1/sqrt(pi K) >= tail_exact

    double operator[](std::size_t k) const { return beta.at(k - 1); }
};

/// beta_1 = 1/2, beta_{k+1} = beta_k (k - 1/2) / (k + 1).
BetaSeries beta_coefficients(std::size_t order);

/// Exact remainder 1 - sum_{k<=K} beta_k = binom(2K,K)/4^K, by a product recurrence.
double beta_tail(std::size_t order);

struct SqrtApplyOptions {
    double tol = 1e-10;
    std::size_t k_max = 100000;
    std::size_t ratio_window = 8;
};

struct SqrtChainResult {
    markov::Observable g;
    std::size_t k_used = 0;
    double err_bound = 0.0;            ///< certified remainder, pi-weighted L^2 norm
    double contraction_ratio = 0.0;    ///< empirical ||Q^{k+1}h|| / ||Q^k h|| over the last window
    std::vector<double> power_norms;   ///< ||Q^k h|| for k = 0..k_used
};

/**
 * g = h - sum_{k=1}^K beta_k Q^k h with K chosen adaptively.
 *
 * Stops at the first K whose remainder bound sum_{k>K} beta_k ||Q^k h|| is at
 * most tol. Two bounds are used: ||Q^K h|| * tail(K), valid because Q is an
 * L^2(pi) contraction, and the geometric estimate beta_{K+1} ||Q^K h|| r/(1-r)
 * from the empirical contraction ratio r over the last `ratio_window` powers.
 * Throws NoConvergence when K reaches k_max first.
 */
SqrtChainResult sqrt_apply_chain(const markov::StationaryChain& chain, const markov::Observable& h,
                                 const SqrtApplyOptions& opts = {});

/// ||sqrt(I-Q)(sqrt(I-Q) h) - (I-Q) h||_pi, each root evaluated to `tol`.
double verify_square(const markov::StationaryChain& chain, const markov::Observable& h,
                     const SqrtApplyOptions& opts = {});

struct SqrtSequenceResult {
    std::vector<double> c;          ///< c_j for j = 0..j_max
    std::size_t order = 0;          ///< K
    double beta_tail = 0.0;         ///< 1 - sum_{k<=K} beta_k
    double trunc_error_bound = 0.0; ///< max_j tail * (|a_j| + sup_{i>j+K} |a_i|)
    /// True when every truncated term beta_k (a_j - a_{j+k}) is >= 0, so the
    /// truncated c_j are lower bounds for the full series.
    bool lower_bound_certified = false;
};

/**
 * c_j = sum_{k=1}^K beta_k (a_j - a_{j+k}) for 0 <= j <= j_max.
 *
 * `a` must hold at least j_max + K + 1 entries (InsufficientHorizon).
 * `a_tail_sup` bounds |a_i| beyond the supplied entries; the default 0 treats
 * the supplied entries as the whole sequence.
 */
SqrtSequenceResult sqrt_apply_sequence(const std::vector<double>& a, std::size_t j_max, std::size_t order,
                                       double a_tail_sup = 0.0);

/// Generator form: materializes a_0..a_{j_max+K} from `a` first.
SqrtSequenceResult sqrt_apply_sequence(const std::function<double(std::size_t)>& a, std::size_t j_max,
                                       std::size_t order, double a_tail_sup = 0.0);

}  // namespace martapprox::frac
