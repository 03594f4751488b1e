#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "martapprox/error.hpp"
#include "martapprox/frac_poisson.hpp"
#include "test_support.hpp"

using namespace martapprox;
using namespace martapprox::testing;

namespace {

// beta_k = binom(2k, k) / (4^k (2k - 1)), evaluated through log-gamma in long double.
long double beta_binomial(std::size_t k) {
    const long double kk = static_cast<long double>(k);
    const long double log_c = std::lgamma(2 * kk + 1) - 2 * std::lgamma(kk + 1) - kk * std::log(4.0L);
    return std::exp(log_c) / (2 * kk - 1);
}

}  // namespace

TEST(Beta, FirstTerms) {
    const auto b = frac::beta_coefficients(4);
    EXPECT_EQ(b[1], 0.5);
    EXPECT_EQ(b[2], 0.125);
    EXPECT_EQ(b[3], 0.0625);
    EXPECT_EQ(b[4], 0.0390625);
    EXPECT_EQ(b.partial_sum, 0.7265625);
}

TEST(Beta, MatchesBinomial) {
    const auto b = frac::beta_coefficients(1000);
    for (std::size_t k = 1; k <= 1000; ++k) {
        const double direct = static_cast<double>(beta_binomial(k));
        EXPECT_LE(std::abs(b[k] - direct), 1e-14);
        EXPECT_LE(std::abs(b[k] - direct), 1e-12 * direct) << k;
    }
}

TEST(Beta, TailMajorant) {
    const auto b = frac::beta_coefficients(1000000);
    double partial = 0.0;
    std::size_t next_check = 1;
    for (std::size_t k = 1; k <= 1000000; ++k) {
        ASSERT_GT(b[k], 0.0);
        partial += b[k];
        if (k == next_check) {
            const double tail = frac::beta_tail(k);
            EXPECT_GT(tail, 0.0);
            EXPECT_NEAR(tail, 1.0 - partial, 1e-12);
            EXPECT_LE(tail, 1.0 / std::sqrt(std::numbers::pi * static_cast<double>(k)));
            next_check = next_check * 2 + 1;
        }
    }
    EXPECT_LE(b.tail_exact, b.tail_bound);
}

TEST(Beta, Asymptotics) {
    const auto b = frac::beta_coefficients(100000);
    double prev = 0.0;
    for (std::size_t k = 100; k <= 100000; k += 100) {
        const double r = b[k] * 2.0 * std::sqrt(std::numbers::pi) * std::pow(static_cast<double>(k), 1.5);
        EXPECT_GE(r, 0.9);
        EXPECT_LE(r, 1.1);
        if (prev > 0.0) EXPECT_LT(std::abs(r - 1.0), std::abs(prev - 1.0));
        prev = r;
    }
}

TEST(SqrtChain, TwoState) {
    const auto chain = two_state();
    const auto h = two_state_g(chain);
    const auto r = frac::sqrt_apply_chain(chain, h, {.tol = 1e-10});
    EXPECT_NEAR(r.g[0], std::sqrt(0.5), 1e-9);
    EXPECT_NEAR(r.g[1], -std::sqrt(0.5), 1e-9);
    EXPECT_LE(r.err_bound, 1e-10);
    EXPECT_LE(frac::verify_square(chain, h, {.tol = 1e-10}), 1e-9);
}

TEST(SqrtChain, ZeroAndIid) {
    const auto chain = two_state();
    const auto z = frac::sqrt_apply_chain(chain, markov::Observable::zero(chain));
    EXPECT_EQ(z.g.values().norm(), 0.0);
    EXPECT_EQ(frac::verify_square(chain, markov::Observable::zero(chain)), 0.0);

    const auto iid = iid_chain(Vector{{0.2, 0.3, 0.5}});
    const auto h = markov::Observable::centered(iid, Vector{{1, -2, 4}});
    const auto r = frac::sqrt_apply_chain(iid, h);
    EXPECT_LE((r.g.values() - h.values()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(SqrtChain, NoConvergence) {
    const auto chain = two_state();
    try {
        frac::sqrt_apply_chain(chain, two_state_g(chain), {.tol = 1e-300, .k_max = 10});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NoConvergence);
        EXPECT_NE(std::string(e.what()).find("trace"), std::string::npos);
    }
}

TEST(SqrtChain, VerifySquareNormalChains) {
    std::mt19937_64 rng(77);
    for (int t = 0; t < 20; ++t) {
        const auto chain = random_normal_chain(rng, 3 + t % 5);
        const auto h = random_observable(rng, chain);
        EXPECT_LE(frac::verify_square(chain, h, {.tol = 1e-10}), 1e-9);
    }
}

TEST(SqrtChain, PlusNormOnReversibleChains) {
    // ||g||_+^2 = <(I + Q) h, h> when Q is self-adjoint and g = sqrt(I - Q) h.
    std::mt19937_64 rng(78);
    for (int t = 0; t < 10; ++t) {
        const auto chain = random_reversible_chain(rng, 4);
        const auto h = random_observable(rng, chain);
        const auto g = frac::sqrt_apply_chain(chain, h, {.tol = 1e-12}).g;
        const Vector ih = h.values() + chain.q() * h.values();
        EXPECT_NEAR(markov::plus_norm_sq(chain, g).value, chain.inner(ih, h.values()), 1e-8);
        const auto grid = dyadic_grid(1, 10);
        EXPECT_EQ(markov::criteria_diagnostic(chain, g, grid, grid).cond2.verdict, Verdict::Holds);
    }
}

TEST(SqrtSequence, GeometricClosedForm) {
    std::vector<double> a(1 + 40 + 200000);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::ldexp(1.0, -static_cast<int>(std::min<std::size_t>(i, 1060)));
    const auto r = frac::sqrt_apply_sequence(a, 40, 200000);
    // Full series: 2^-j sqrt(1/2); truncation leaves at most tail * a_j.
    for (std::size_t j = 0; j <= 40; ++j) {
        const double exact = std::ldexp(std::sqrt(0.5), -static_cast<int>(j));
        EXPECT_LE(r.c[j], exact + 1e-12 * a[j]);
        EXPECT_GE(r.c[j], exact - r.beta_tail * a[j] - 1e-12 * a[j]);
    }
    EXPECT_TRUE(r.lower_bound_certified);
}

TEST(SqrtSequence, ZeroAndShortInput) {
    const auto r = frac::sqrt_apply_sequence(std::vector<double>(20, 0.0), 9, 10);
    for (double c : r.c) EXPECT_EQ(c, 0.0);
    try {
        frac::sqrt_apply_sequence(std::vector<double>(5, 1.0), 9, 10);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InsufficientHorizon);
    }
}
