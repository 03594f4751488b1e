#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "martapprox/error.hpp"
#include "martapprox/simulate.hpp"
#include "test_support.hpp"

using namespace martapprox;
using namespace martapprox::testing;

namespace {

// Loops over several n share one family-wise band.
constexpr double kFamilySe = 4.0;

double mean_sq(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x * x;
    return s / static_cast<double>(xs.size());
}

double se_of_mean_sq(const std::vector<double>& xs) {
    const double m = mean_sq(xs);
    double v = 0.0;
    for (double x : xs) v += (x * x - m) * (x * x - m);
    return std::sqrt(v / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
}

seq::CoeffArray one_column(seq::CoeffSource s) { return {seq::CoeffColumn{"0", std::move(s)}}; }

// E[S_n^2] = sum_{m <= n} (sum_{k = max(1, m)}^{n} c_{k-m})^2 for a single filter column.
double exact_sn_second_moment(const std::vector<double>& c, std::size_t n) {
    const auto w = static_cast<std::ptrdiff_t>(c.size()) - 1;
    double total = 0.0;
    for (std::ptrdiff_t m = static_cast<std::ptrdiff_t>(n); m >= 1 - w; --m) {
        double s = 0.0;
        for (std::ptrdiff_t k = std::max<std::ptrdiff_t>(1, m); k <= static_cast<std::ptrdiff_t>(n); ++k) {
            if (k - m <= w) s += c[static_cast<std::size_t>(k - m)];
        }
        total += s * s;
    }
    return total;
}

}  // namespace

TEST(Noise, ParseAndName) {
    for (const char* s : {"gaussian", "rademacher", "centered_uniform"}) {
        EXPECT_EQ(sim::NoiseSpec::parse(s).name(), s);
    }
    const auto tp = sim::NoiseSpec::parse("two_point:0.3");
    EXPECT_EQ(tp.kind, sim::NoiseSpec::Kind::TwoPoint);
    EXPECT_EQ(tp.p, 0.3);
    EXPECT_EQ(sim::NoiseSpec::parse(tp.name()).p, 0.3);
    EXPECT_THROW(sim::NoiseSpec::parse("cauchy"), Error);
    EXPECT_THROW(sim::NoiseSpec::parse("two_point:0"), Error);
    EXPECT_THROW(sim::NoiseSpec::parse("two_point:1.5"), Error);
}

TEST(Noise, UnitVariance) {
    const auto arr = one_column(seq::CoeffSource::finite({1.0}));
    for (const char* s : {"gaussian", "rademacher", "centered_uniform", "two_point:0.2"}) {
        const auto r = sim::simulate_superlinear(arr, {sim::NoiseSpec::parse(s)}, 1, 50000, 5);
        EXPECT_NEAR(mean_sq(r.s_over_sqrt_n), 1.0, 4.0 * se_of_mean_sq(r.s_over_sqrt_n)) << s;
    }
}

TEST(Chain, ThreadIndependent) {
    const auto chain = two_state();
    const auto g = two_state_g(chain);
    const auto a = sim::simulate_chain(chain, g, 200, 5000, 42, {.threads = 1});
    const auto b = sim::simulate_chain(chain, g, 200, 5000, 42, {.threads = 4});
    EXPECT_EQ(a.w0, b.w0);
    EXPECT_EQ(a.s_over_sqrt_n, b.s_over_sqrt_n);
    const auto c = sim::simulate_chain(chain, g, 200, 5000, 43);
    EXPECT_NE(a.s_over_sqrt_n, c.s_over_sqrt_n);

    const auto p = sim::simulate_path(chain, 200, 42, 17);
    double s = 0.0;
    for (std::size_t k = 1; k <= 200; ++k) s += g.values()[p[k]];
    EXPECT_EQ(a.w0[17], p[0]);
    EXPECT_NEAR(a.s_over_sqrt_n[17], s / std::sqrt(200.0), 1e-12);
}

TEST(Chain, TwoStateCclt) {
    const auto chain = two_state();
    const auto g = two_state_g(chain);
    const auto s = sim::simulate_chain(chain, g, 2000, 40000, 7, {.threads = 4});
    const auto r = sim::cclt_check(s, chain.pi(), 3.0);
    EXPECT_NEAR(r.kappa_sq_hat, 3.0, 0.15);
    EXPECT_LE(r.distance, 0.05);
    ASSERT_EQ(r.per_state.size(), 2u);
    EXPECT_EQ(r.per_state[0].count + r.per_state[1].count, 40000u);
    EXPECT_FALSE(r.unconditional_surrogate);
    // Finite-n variance: E[S_n^2]/n from the exact formula, within 3 SE.
    const double exact = markov::sn_second_moment(chain, g, 2000) / 2000.0;
    EXPECT_NEAR(r.kappa_sq_hat, exact, 3.0 * r.kappa_sq_hat_se);
}

TEST(Chain, SmallNMoments) {
    const auto chain = two_state();
    const auto g = two_state_g(chain);
    for (std::size_t n : {1, 2, 4, 16, 64}) {
        const auto s = sim::simulate_chain(chain, g, n, 40000, 100 + n);
        const double exact = markov::sn_second_moment(chain, g, n) / static_cast<double>(n);
        EXPECT_NEAR(mean_sq(s.s_over_sqrt_n), exact, kFamilySe * se_of_mean_sq(s.s_over_sqrt_n)) << n;
    }
}

TEST(Chain, EmpiricalResidual) {
    const auto chain = two_state();
    const auto g = two_state_g(chain);
    const auto est = sim::empirical_residual(chain, g, {1, 4, 16, 64}, 40000, 11, {.threads = 2});
    ASSERT_EQ(est.size(), 4u);
    for (const auto& e : est) {
        EXPECT_NEAR(e.rnn_mean, e.rnn_exact, 3.0 * e.rnn_se + 1e-12) << e.n;
        EXPECT_NEAR(e.rn_mean, e.rn_exact, 3.0 * e.rn_se + 1e-12) << e.n;
        EXPECT_EQ(e.rnn_exact, markov::residual_second_moment(chain, g, e.n, e.n).value);
    }
}

TEST(Cclt, Degenerate) {
    const auto chain = two_state();
    const auto s = sim::simulate_chain(chain, markov::Observable::zero(chain), 10, 100, 1);
    const auto r = sim::cclt_check(s, chain.pi(), 0.0);
    EXPECT_TRUE(r.degenerate_kappa);
    EXPECT_EQ(r.distance_kind, sim::DistanceKind::Levy);
    EXPECT_LE(r.distance, 1e-12);
    try {
        sim::cclt_check(s, chain.pi(), 0.0, sim::DistanceKind::Kolmogorov, {.allow_degenerate = false});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateKappa);
    }
}

TEST(Cclt, Distances) {
    std::vector<double> v{0.0};
    EXPECT_NEAR(sim::kolmogorov_distance(v, 1.0), 0.5, 1e-12);
    std::vector<double> z(10, 0.0);
    EXPECT_LE(sim::levy_distance(z, 0.0), 1e-12);
    std::vector<double> shifted(10, 0.25);
    EXPECT_NEAR(sim::levy_distance(shifted, 0.0), 0.25, 1e-12);
    EXPECT_EQ(sim::parse_distance("levy"), sim::DistanceKind::Levy);
    EXPECT_EQ(sim::to_string(sim::DistanceKind::Kolmogorov), "kolmogorov");
}

TEST(Superlinear, Geometric) {
    const auto arr = one_column(seq::CoeffSource::geometric(0.5));
    const auto w = sim::choose_warmup(arr);
    EXPECT_GT(w, 0u);
    const auto r = sim::simulate_superlinear(arr, {sim::NoiseSpec{}}, 2000, 20000, 3, std::nullopt, {.threads = 4});
    EXPECT_EQ(r.warmup, w);
    EXPECT_LT(r.truncation_var_bound, sim::kWarmupVarianceBudget);
    EXPECT_NEAR(mean_sq(r.s_over_sqrt_n), 4.0, 0.2);
    const auto c = sim::cclt_check(r.s_over_sqrt_n, 2000, 4.0);
    EXPECT_TRUE(c.unconditional_surrogate);
    EXPECT_LE(c.distance, 0.05);

    const auto again = sim::simulate_superlinear(arr, {sim::NoiseSpec{}}, 2000, 20000, 3, std::nullopt, {.threads = 1});
    EXPECT_EQ(again.s_over_sqrt_n, r.s_over_sqrt_n);
}

TEST(Superlinear, SmallNMoments) {
    const auto src = seq::CoeffSource::geometric(0.5);
    const auto arr = one_column(src);
    const auto w = sim::choose_warmup(arr);
    const auto c = src.take(w + 1);
    for (std::size_t n : {1, 2, 8, 64}) {
        const auto r = sim::simulate_superlinear(arr, {sim::NoiseSpec::parse("rademacher")}, n, 40000, 20 + n);
        const double exact = exact_sn_second_moment(c, n) / static_cast<double>(n);
        EXPECT_NEAR(mean_sq(r.s_over_sqrt_n), exact, kFamilySe * se_of_mean_sq(r.s_over_sqrt_n)) << n;
    }
}

TEST(Superlinear, CoboundaryAndZero) {
    const auto cob = one_column(seq::CoeffSource::finite({1.0, -1.0}));
    const auto r = sim::simulate_superlinear(cob, {sim::NoiseSpec{}}, 400, 20000, 9);
    std::vector<double> sn(r.s_over_sqrt_n);
    for (double& x : sn) x *= std::sqrt(400.0);
    EXPECT_NEAR(mean_sq(sn), 2.0, 3.0 * se_of_mean_sq(sn));
    const auto c = sim::cclt_check(r.s_over_sqrt_n, 400, 0.0, sim::DistanceKind::Levy);
    EXPECT_TRUE(c.degenerate_kappa);
    EXPECT_LE(c.distance, 0.2);

    const auto zero = one_column(seq::CoeffSource::finite({0.0}));
    const auto z = sim::simulate_superlinear(zero, {sim::NoiseSpec{}}, 50, 100, 9);
    for (double x : z.s_over_sqrt_n) EXPECT_EQ(x, 0.0);
}

TEST(Superlinear, TailRequired) {
    const auto arr = one_column(seq::CoeffSource::data({1.0, 0.5, 0.25}));
    try {
        sim::choose_warmup(arr);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::TailNotCertified);
    }
    EXPECT_NO_THROW(sim::simulate_superlinear(arr, {sim::NoiseSpec{}}, 10, 10, 1, 2));
}
