#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "martapprox/markov_core.hpp"
#include "martapprox/sequence_models.hpp"

namespace martapprox::sim {

/// Innovation laws, each with mean 0 and variance 1.
/// two_point(p): +-1/sqrt(p) with probability p/2 each, 0 otherwise.
struct NoiseSpec {
    enum class Kind { Gaussian, Rademacher, CenteredUniform, TwoPoint };
    Kind kind = Kind::Gaussian;
    double p = 1.0;

    static NoiseSpec parse(std::string_view text);  ///< "gaussian", "rademacher", "centered_uniform", "two_point:0.3"
    std::string name() const;
};

/// Generator for one explicitly derived substream: (seed, a, b) -> engine.
/// Distinct (a, b) pairs give statistically independent streams.
std::mt19937_64 substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

/// W_0 ~ pi, then W_k ~ Q(W_{k-1}, .) for k = 1..n. Path `index` of the
/// stream family identified by `seed`; simulate_chain uses the same paths.
std::vector<std::size_t> simulate_path(const markov::StationaryChain& chain, std::size_t n, std::uint64_t seed,
                                       std::uint64_t index);

struct ChainSamples {
    std::size_t n = 0;
    std::vector<std::size_t> w0;       ///< initial state per path
    std::vector<double> s_over_sqrt_n; ///< S_n / sqrt(n) per path
};

struct RunOptions {
    unsigned threads = 1;  ///< results are bit-identical for any thread count
};

ChainSamples simulate_chain(const markov::StationaryChain& chain, const markov::Observable& g, std::size_t n,
                            std::size_t paths, std::uint64_t seed, const RunOptions& run = {});

struct SuperlinearSamples {
    std::size_t n = 0;
    std::size_t warmup = 0;
    std::vector<double> s_over_sqrt_n;
    /// Certified bound on sum_j sum_{i>warmup} c_{i,j}^2, the per-step variance dropped.
    double truncation_var_bound = 0.0;
    std::vector<std::string> noise;  ///< per column
};

inline constexpr double kWarmupVarianceBudget = 1e-6;

/// Smallest W with sum_j sum_{i>W} c_{i,j}^2 < budget, from the certified
/// column tails. Throws TailNotCertified if some column has no tail bound.
std::size_t choose_warmup(const seq::CoeffArray& arr, double budget = kWarmupVarianceBudget);

/**
 * S_n = X_1 + ... + X_n for X_k = sum_j sum_{i<=W} c_{i,j} xi_{k-i,j}.
 *
 * S_n is assembled as sum_m w_m xi_m with the exact weights of the
 * truncated filter, so each path costs n + W innovations per column.
 * `noise` holds one spec per column or a single spec for all columns.
 * `warmup` defaults to choose_warmup(arr).
 */
SuperlinearSamples simulate_superlinear(const seq::CoeffArray& arr, const std::vector<NoiseSpec>& noise,
                                        std::size_t n, std::size_t paths, std::uint64_t seed,
                                        std::optional<std::size_t> warmup = std::nullopt,
                                        const RunOptions& run = {});

enum class DistanceKind { Kolmogorov, Levy };
std::string_view to_string(DistanceKind k) noexcept;
DistanceKind parse_distance(std::string_view text);

struct StateDistance {
    std::size_t state = 0;
    std::size_t count = 0;
    double pi = 0.0;
    double distance = 0.0;
};

struct CcltReport {
    std::size_t n = 0;
    std::size_t paths = 0;
    double kappa_sq = 0.0;          ///< reference variance of the limit law
    double kappa_sq_hat = 0.0;      ///< mean of (S_n / sqrt n)^2
    double kappa_sq_hat_se = 0.0;
    double distance = 0.0;
    DistanceKind distance_kind = DistanceKind::Kolmogorov;
    std::vector<StateDistance> per_state;
    bool unconditional_surrogate = false;
    bool degenerate_kappa = false;  ///< kappa_sq = 0: compared with the point mass at 0 in the Levy metric
};

struct CcltOptions {
    /// With kappa_sq = 0 a Kolmogorov comparison has no continuous reference.
    /// When true the check falls back to the Levy distance to the point mass at
    /// 0 and flags the report; when false it throws DegenerateKappa.
    bool allow_degenerate = true;
};

/// Conditional check: per-initial-state distance to N(0, kappa_sq), pi-averaged.
CcltReport cclt_check(const ChainSamples& samples, const Eigen::VectorXd& pi, double kappa_sq,
                      DistanceKind kind = DistanceKind::Kolmogorov, const CcltOptions& opts = {});

/// Unlabeled samples: unconditional distance, flagged as a surrogate.
CcltReport cclt_check(const std::vector<double>& s_over_sqrt_n, std::size_t n, double kappa_sq,
                      DistanceKind kind = DistanceKind::Kolmogorov, const CcltOptions& opts = {});

/// sup_x |F_n(x) - Phi(x / sigma)| for the empirical law of `values` (sorted in place).
double kolmogorov_distance(std::vector<double>& values, double sigma);
/// Levy distance between the empirical law of `values` and N(0, sigma^2);
/// sigma = 0 means the point mass at 0.
double levy_distance(std::vector<double>& values, double sigma);

struct ResidualEstimate {
    std::size_t n = 0;
    /// R_nn = S_n - sum_{k<=n} Hbar_n(W_{k-1}, W_k).
    double rnn_mean = 0.0;   ///< empirical E[R_nn^2]
    double rnn_se = 0.0;
    double rnn_exact = 0.0;  ///< residual_second_moment(n, n)
    /// R_n = S_n - sum_{k<=n} H(W_{k-1}, W_k) with the limiting kernel.
    double rn_mean = 0.0;
    double rn_se = 0.0;
    double rn_exact = 0.0;   ///< martingale_residual_second_moment(n)
};

std::vector<ResidualEstimate> empirical_residual(const markov::StationaryChain& chain, const markov::Observable& g,
                                                 const std::vector<std::size_t>& n_grid, std::size_t paths,
                                                 std::uint64_t seed, const RunOptions& run = {});

}  // namespace martapprox::sim
