#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "martapprox/slope.hpp"

/**
 * Exact finite-state engine for additive functionals S_n = g(W_1)+...+g(W_n)
 * of a stationary ergodic Markov chain.
 *
 * Every inner product and norm in this namespace is weighted by the
 * stationary distribution pi: <f, h> = sum_w pi(w) f(w) h(w). Kernels on
 * state pairs use the joint law of (W_0, W_1): ||h||^2 = sum pi(w0) Q(w0,w1) h(w0,w1)^2.
 */
namespace martapprox::markov {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kRowSumTolerance = 1e-9;
inline constexpr double kPiTolerance = 1e-10;
inline constexpr double kMeanZeroTolerance = 1e-10;

class StationaryChain {
public:
    /// Builds a chain after checking stochasticity, ergodicity and pi.
    /// Rows within 1e-9 of summing to one are renormalized.
    static StationaryChain validate(const Matrix& q_raw, const std::optional<Vector>& pi = std::nullopt);

    std::size_t n_states() const noexcept { return static_cast<std::size_t>(q_.rows()); }
    const Matrix& q() const noexcept { return q_; }
    const Vector& pi() const noexcept { return pi_; }

    double inner(const Vector& a, const Vector& b) const;
    double norm_sq(const Vector& a) const { return inner(a, a); }
    double mean(const Vector& a) const { return pi_.dot(a); }

private:
    StationaryChain(Matrix q, Vector pi) : q_(std::move(q)), pi_(std::move(pi)) {}

    Matrix q_;
    Vector pi_;
};

inline StationaryChain validate_chain(const Matrix& q_raw, const std::optional<Vector>& pi = std::nullopt) {
    return StationaryChain::validate(q_raw, pi);
}

/// A mean-zero function on the state space, g in L_0^2(pi).
class Observable {
public:
    Observable() = default;

    /// Rejects values whose pi-mean exceeds 1e-10 in magnitude (NotMeanZero).
    static Observable from_values(const StationaryChain& chain, Vector values);
    /// Subtracts the pi-mean.
    static Observable centered(const StationaryChain& chain, Vector values);
    static Observable zero(const StationaryChain& chain);

    const Vector& values() const noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }

private:
    friend Observable unchecked_observable(Vector values);
    explicit Observable(Vector values) : values_(std::move(values)) {}
    Vector values_;
};

/// Wraps a vector already known to be mean-zero (images of mean-zero
/// vectors under Q, Q^k, V_n, ...). No check is performed.
Observable unchecked_observable(Vector values);

/// A function h(w0, w1) on state pairs, an element of L^2(pi_1).
struct PairKernel {
    Matrix values;

    double norm_sq(const StationaryChain& chain) const;
    /// sum_{w1} Q(w0,w1) h(w0,w1) for each w0.
    Vector conditional_mean(const StationaryChain& chain) const;
    double operator()(std::size_t w0, std::size_t w1) const {
        return values(static_cast<Eigen::Index>(w0), static_cast<Eigen::Index>(w1));
    }
};

/// h(w0, w1) = f(w1) - Qf(w0).
PairKernel coboundary_kernel(const StationaryChain& chain, const Vector& f);

Observable apply_q(const StationaryChain& chain, const Observable& g, std::size_t k);

struct AdjointReport {
    Matrix qstar;
    bool reversible = false;
    bool normal = false;
    bool doubly_stochastic = false;
    double reversibility_gap = 0.0;  ///< max |Q* - Q|
    double normality_gap = 0.0;      ///< max |QQ* - Q*Q|
    std::string note;
};

/// Q*(w,z) = pi(z) Q(z,w) / pi(w), with a structural classification.
AdjointReport adjoint(const StationaryChain& chain);

struct VSums {
    Observable v;     ///< V_n g = sum_{k<n} Q^k g
    Observable vbar;  ///< (V_1 + ... + V_n) g / n = sum_{k<n} (1 - k/n) Q^k g
};

VSums v_sums(const StationaryChain& chain, const Observable& g, std::size_t n);

/// E[S_n^2] = 2n<g, Vbar_n g> - n||g||^2, cross-checked against the
/// autocovariance sum; throws CrossCheckFailed on disagreement beyond 1e-9
/// relative to max(|values|, ||g||^2).
double sn_second_moment(const StationaryChain& chain, const Observable& g, std::size_t n);

/// n*gamma(0) + 2 sum_{k=1}^{n-1} (n-k) gamma(k), gamma(k) = <g, Q^k g>.
double sn_second_moment_autocovariance(const StationaryChain& chain, const Observable& g, std::size_t n);

struct PoissonSolution {
    Observable u;          ///< mean-zero solution of (I - Q)u = g
    double residual = 0.0; ///< max |(I - Q)u - g|
};

struct PlusNorm {
    double value = 0.0;  ///< ||g||_+^2 = 2<g,u> - ||g||^2
    PoissonSolution solution;
};

PoissonSolution solve_poisson(const StationaryChain& chain, const Observable& g);
PlusNorm plus_norm_sq(const StationaryChain& chain, const Observable& g);

struct MartingaleKernel {
    PairKernel h;  ///< H(w0,w1) = u(w1) - Qu(w0)
    double kappa_sq = 0.0;
    Observable u;
};

MartingaleKernel martingale_kernel(const StationaryChain& chain, const Observable& g);

/// Hbar_n(w0,w1) = Vbar_n g(w1) - Q Vbar_n g(w0).
PairKernel hbar_kernel(const StationaryChain& chain, const Observable& g, std::size_t n);

struct ResidualMoment {
    double value = 0.0;  ///< exact E[R_{nk}^2]
    double bound = 0.0;  ///< 9 max_{m<=n} ||V_m g||^2
};

/**
 * Exact second moment of R_{nk} = S_k - (Hbar_n(W_0,W_1) + ... + Hbar_n(W_{k-1},W_k)).
 *
 * Uses R_{nk} = A(W_0) - A(W_k) + S_k(B)/n with A = Q Vbar_n g, B = Q V_n g,
 * and expands the square into stationary cross moments <f, Q^j h>.
 */
ResidualMoment residual_second_moment(const StationaryChain& chain, const Observable& g, std::size_t n,
                                      std::size_t k);

/// E[(S_n - M_n)^2] for the limiting martingale M_n = sum H(W_{k-1}, W_k).
/// Here S_n - M_n = Qu(W_0) - Qu(W_n).
double martingale_residual_second_moment(const StationaryChain& chain, const Observable& g, std::size_t n);

struct CriteriaDiagnostic {
    SlopeVerdict cond2;   ///< slope of log ||V_n g|| vs log n, threshold 1/2
    SlopeVerdict cond16;  ///< slope of log[(1/m) sum_{k<=m} ||Q^k g||_+^2] vs log m, threshold 0
    std::vector<double> plus_norms_of_powers;  ///< ||Q^k g||_+^2 for k = 1..max(m_grid)
};

CriteriaDiagnostic criteria_diagnostic(const StationaryChain& chain, const Observable& g,
                                       const std::vector<std::size_t>& n_grid,
                                       const std::vector<std::size_t>& m_grid,
                                       double margin = kDefaultSlopeMargin);

}  // namespace martapprox::markov
