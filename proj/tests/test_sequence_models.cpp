#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "martapprox/error.hpp"
#include "martapprox/sequence_models.hpp"

using namespace martapprox;
using namespace martapprox::seq;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no martapprox::Error thrown";
    return ErrorCode::InvalidInput;
}

const CoeffSource kCoboundary = CoeffSource::finite({1.0, -1.0});

}  // namespace

TEST(PartialSums, Geometric) {
    const auto s = partial_sums(CoeffSource::geometric(0.5), 3);
    EXPECT_EQ(s.b[0], 1.0);
    EXPECT_EQ(s.b[1], 1.5);
    EXPECT_EQ(s.b[2], 1.75);
    EXPECT_EQ(s.bbar[0], 0.0);
    EXPECT_EQ(s.bbar[1], 1.0);
    EXPECT_EQ(s.bbar[2], 1.25);  // (b_0 + b_1) / 2
    EXPECT_DOUBLE_EQ(s.bbar[3], (1.0 + 1.5 + 1.75) / 3.0);
    EXPECT_EQ(s.b_at(-1), 0.0);
}

TEST(PartialSums, CoboundaryAndZero) {
    const auto s = partial_sums(kCoboundary, 100);
    EXPECT_EQ(s.b[0], 1.0);
    for (std::size_t n = 1; n <= 100; ++n) {
        EXPECT_EQ(s.b[n], 0.0);
        EXPECT_DOUBLE_EQ(s.bbar[n], 1.0 / static_cast<double>(n));
    }
    const auto z = partial_sums(CoeffSource{}, 10);
    for (std::size_t n = 0; n <= 10; ++n) EXPECT_EQ(z.b[n] + z.bbar[n], 0.0);
}

TEST(PartialSums, DataHorizon) {
    const auto d = CoeffSource::data({1, 2, 3});
    EXPECT_EQ(d.at(2), 3.0);
    EXPECT_EQ(code_of([&] { d.at(3); }), ErrorCode::HorizonExceeded);
    EXPECT_EQ(code_of([&] { partial_sums(d, 5); }), ErrorCode::HorizonExceeded);
    EXPECT_FALSE(d.tail_sq(1).has_value());
}

TEST(VnNorm, Coboundary) {
    const auto s = partial_sums(kCoboundary, 64);
    EXPECT_EQ(vn_norm_sq_linear(s, 1, 32).value, 2.0);
    for (std::size_t n = 2; n <= 32; ++n) EXPECT_EQ(vn_norm_sq_linear(s, n, 32).value, 1.0) << n;
    const auto z = partial_sums(CoeffSource{}, 16);
    EXPECT_EQ(vn_norm_sq_linear(z, 3, 8).value, 0.0);
}

TEST(VnNorm, FirstEqualsSumOfSquares) {
    const auto s = partial_sums(CoeffSource::geometric(0.5), 200);
    const auto v = vn_norm_sq_linear(s, 1, 199);
    EXPECT_TRUE(v.certified);
    EXPECT_LE(std::abs(v.value - 4.0 / 3.0), v.tail_bound + 1e-15);

    const auto e5 = partial_sums(CoeffSource::example5(), 5000);
    const auto v5 = vn_norm_sq_linear(e5, 1, 4999);
    double direct = 0.0;
    for (std::size_t i = 0; i <= 5000; ++i) direct += e5.a[i] * e5.a[i];
    EXPECT_NEAR(v5.value, direct, 1e-12);
}

TEST(VnNorm, UncertifiedTail) {
    const auto s = partial_sums(CoeffSource::data({1, 0.5, 0.25, 0.125}), 3);
    EXPECT_EQ(code_of([&] { vn_norm_sq_linear(s, 1, 2); }), ErrorCode::TailNotCertified);
    EXPECT_TRUE(std::isnan(vn_norm_sq_linear_raw(s, 1, 2).tail_bound));
}

TEST(SnSecondMoment, LinearProcess) {
    // S_n = xi_n - xi_0 for the coboundary.
    const auto s = partial_sums(kCoboundary, 300);
    for (std::size_t n : {1, 5, 100}) EXPECT_EQ(sn_second_moment_linear(s, n, 100).value, 2.0);
    // Geometric: E[S_n^2] = sum_{m<n} b_m^2 + sum_p (b_{p+n} - b_p)^2 with b_m = 2 - 2^-m.
    const auto g = partial_sums(CoeffSource::geometric(0.5), 3000);
    const std::size_t n = 10;
    double direct = 0.0;
    for (std::size_t m = 0; m < n; ++m) direct += std::pow(2 - std::pow(2.0, -double(m)), 2);
    for (std::size_t p = 0; p <= 2000; ++p) {
        direct += std::pow(std::pow(2.0, -double(p)) - std::pow(2.0, -double(p + n)), 2);
    }
    EXPECT_NEAR(sn_second_moment_linear(g, n, 2000).value, direct, 1e-12);
}

TEST(DefaultGrid, Rule) {
    EXPECT_EQ(default_grid(16384), dyadic_grid(4, 11));
    EXPECT_EQ(default_grid(100), dyadic_grid(0, 5));
    EXPECT_EQ(default_grid(4), dyadic_grid(0, 1));
    EXPECT_EQ(code_of([] { default_grid(3); }), ErrorCode::InvalidInput);
}

TEST(Condition10, Verdicts) {
    const std::size_t n_max = 1 << 14;
    const auto grid = default_grid(n_max);
    const std::size_t i_max = n_max - grid.back();
    EXPECT_EQ(condition10_diagnostic(partial_sums(CoeffSource::geometric(0.5), n_max), grid, i_max).verdict.verdict,
              Verdict::Holds);
    // g has coefficients c = sqrt(I - shift) a; a itself (the h side) is not o(n).
    const auto c = example5_build(n_max, 100000).c;
    EXPECT_EQ(condition10_diagnostic(partial_sums(c, n_max), grid, i_max).verdict.verdict, Verdict::Holds);
    EXPECT_EQ(condition10_diagnostic(partial_sums(CoeffSource::example5(), n_max), grid, i_max).verdict.verdict,
              Verdict::Fails);
    const auto power = partial_sums(CoeffSource::power_partial_sums(0.75), n_max);
    EXPECT_EQ(condition10_diagnostic(power, grid, i_max).verdict.verdict, Verdict::Fails);
    EXPECT_TRUE(std::isinf(CoeffSource::power_partial_sums(0.75).tail_sq(10).value()));
}

TEST(LinearVerdict, Fixtures) {
    const auto geo = corollary2_verdict(CoeffSource::geometric(0.5), 1 << 14);
    EXPECT_EQ(geo.exists, Exists::Yes);
    EXPECT_NEAR(geo.kappa_sq.value(), 4.0, 1e-9);
    const auto cob = corollary2_verdict(kCoboundary, 1 << 14);
    EXPECT_EQ(cob.exists, Exists::Yes);
    EXPECT_EQ(cob.kappa_sq.value(), 0.0);
    const auto e5 = corollary2_verdict(example5_build(1 << 14, 100000).c, 1 << 14);
    EXPECT_EQ(e5.exists, Exists::No);
    EXPECT_FALSE(e5.kappa_sq.has_value());
    EXPECT_EQ(e5.bbar_cauchy.verdict, Verdict::Fails);
}

TEST(LinearVerdict, BarCauchyFollowsFromSquares) {
    // Square-summable random sequences: when bbar_n^2 passes the window test
    // and |b_n|/sqrt(n) stays bounded, bbar_n passes as well.
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> expo(0.6, 2.0), sign(-1.0, 1.0);
    const std::size_t n_max = 1 << 15;
    int exercised = 0;
    for (int t = 0; t < 50; ++t) {
        std::vector<double> a(n_max + 1);
        const double p = expo(rng);
        const double bias = 0.5 * sign(rng);
        for (std::size_t i = 0; i < a.size(); ++i) a[i] = (sign(rng) + bias) * std::pow(double(i + 1), -p);
        const auto s = partial_sums(CoeffSource::finite(a), n_max);
        std::vector<double> sq(s.bbar.size());
        for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = s.bbar[i] * s.bbar[i];
        const auto sq_check = cauchy_window({&sq}, n_max, kDefaultCauchyTol);
        if (sq_check.verdict == Verdict::Holds && s.max_b_over_sqrt_n < 100.0) {
            ++exercised;
            EXPECT_EQ(cauchy_window({&s.bbar}, n_max, std::sqrt(kDefaultCauchyTol)).verdict, Verdict::Holds) << t;
        }
    }
    EXPECT_GT(exercised, 10);
}

TEST(Superlinear, SingleColumnReducesToPartialSums) {
    const auto bars = superlinear_bars({{"0", CoeffSource::geometric(0.5)}}, 50);
    const auto s = partial_sums(CoeffSource::geometric(0.5), 50);
    EXPECT_EQ(bars.columns[0].bbar, s.bbar);
    for (std::size_t n = 0; n <= 50; ++n) EXPECT_EQ(bars.bbar_norm_sq[n], s.bbar[n] * s.bbar[n]);
}

TEST(Superlinear, IdenticalCoboundaryColumns) {
    const auto bars = superlinear_bars({{"a", kCoboundary}, {"b", kCoboundary}}, 64);
    for (std::size_t n = 1; n <= 64; ++n) {
        EXPECT_DOUBLE_EQ(bars.bbar_norm_sq[n], 2.0 / double(n * n));
    }
    const auto v = bars.bbar(4);
    EXPECT_EQ(v.entries.at("a"), 0.25);
    EXPECT_EQ(v.norm_sq, 0.125);
}

TEST(Superlinear, Example6Columns) {
    const auto bars = superlinear_bars({{"0", CoeffSource::example6_column(0)}, {"1", CoeffSource::example6_column(1)}},
                                       4096);
    EXPECT_EQ(bars.b_norm_sq[0], 0.0);
    EXPECT_EQ(bars.b_norm_sq[1], 0.0);
    for (std::size_t n : {2, 3, 100, 4096}) {
        const double t = std::sqrt(std::log(double(n)));
        EXPECT_NEAR(bars.columns[0].b[n], std::cos(t), 1e-12);
        EXPECT_NEAR(bars.columns[1].b[n], std::sin(t), 1e-12);
        EXPECT_NEAR(bars.b_norm_sq[n], 1.0, 1e-12);
        EXPECT_NEAR(example6_partial_sum(0, n), std::cos(t), 1e-15);
    }
    EXPECT_EQ(example6_partial_sum(1, 0), 0.0);
    EXPECT_EQ(example6_partial_sum(0, 1), 0.0);
}

TEST(Superlinear, Ragged) {
    try {
        superlinear_bars({{"0", CoeffSource::finite({1, 2, 3})}, {"1", CoeffSource::finite({1, 2})}}, 10);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::RaggedColumns);
        EXPECT_EQ(e.path(), "columns.1");
    }
}

TEST(Condition13, Verdicts) {
    const std::size_t n_max = 1 << 16;
    const auto grid = default_grid(n_max);
    const std::size_t i_max = n_max - grid.back();
    const CoeffArray ex6 = {{"0", CoeffSource::example6_column(0)}, {"1", CoeffSource::example6_column(1)}};
    EXPECT_EQ(condition13_diagnostic(ex6, grid, i_max).verdict.verdict, Verdict::Holds);
    const auto zero = condition13_diagnostic(CoeffArray{{"0", CoeffSource{}}}, grid, i_max);
    EXPECT_EQ(zero.verdict.verdict, Verdict::Holds);
    EXPECT_TRUE(zero.verdict.all_zero);
    const CoeffArray power = {{"0", CoeffSource::power_partial_sums(0.75)}, {"1", CoeffSource::geometric(0.5)}};
    EXPECT_EQ(condition13_diagnostic(power, grid, i_max).verdict.verdict, Verdict::Fails);
}

TEST(SuperlinearVerdict, Verdicts) {
    const std::size_t n_max = 1 << 17;
    const CoeffArray ex6 = {{"0", CoeffSource::example6_column(0)}, {"1", CoeffSource::example6_column(1)}};
    const auto v6 = theorem1_verdict(ex6, n_max);
    EXPECT_EQ(v6.exists, Exists::No);
    EXPECT_EQ(v6.norm_condition.verdict.verdict, Verdict::Holds);
    EXPECT_EQ(v6.bbar_cauchy.verdict, Verdict::Fails);

    const auto zero = theorem1_verdict(CoeffArray{{"0", CoeffSource{}}, {"1", CoeffSource{}}}, 64);
    EXPECT_EQ(zero.exists, Exists::Yes);
    EXPECT_EQ(zero.kappa_sq.value(), 0.0);

    const auto geo = theorem1_verdict(CoeffArray{{"0", CoeffSource::geometric(0.5)}}, 1 << 14);
    EXPECT_EQ(geo.exists, Exists::Yes);
    EXPECT_NEAR(geo.kappa_sq.value(), 4.0, 1e-9);
}

TEST(SuperlinearVerdict, AgreesWithLinearOnOneColumn) {
    for (const auto& src : {CoeffSource::geometric(0.5), CoeffSource::geometric(-0.9), kCoboundary,
                            CoeffSource::example5()}) {
        const auto a = corollary2_verdict(src, 4096);
        const auto b = theorem1_verdict(CoeffArray{{"0", src}}, 4096);
        EXPECT_EQ(a.exists, b.exists);
        EXPECT_EQ(a.kappa_sq, b.kappa_sq);
        EXPECT_EQ(a.norm_condition.verdict.values, b.norm_condition.verdict.values);
        EXPECT_EQ(a.bbar_cauchy.oscillation_upper, b.bbar_cauchy.oscillation_upper);
        EXPECT_EQ(a.bbar_norm_sq_final, b.bbar_norm_sq_final);
    }
}

TEST(Example5, Coefficients) {
    EXPECT_DOUBLE_EQ(CoeffSource::example5().at(0), 1.0 / std::log(2.0));
    const auto r = example5_build(2000, 20000);
    ASSERT_TRUE(r.j0.has_value());
    EXPECT_GE(r.min_ratio_after_j0, 1.0);
    ASSERT_TRUE(r.n0.has_value());
    EXPECT_GT(r.b_final, r.b_100);
    EXPECT_TRUE(r.sqrt.lower_bound_certified);
    EXPECT_LE(r.majorant_ratio, 1.0);
    // The certified tail of c dominates the explicit squares it replaces.
    double explicit_tail = 0.0;
    for (std::size_t j = 1001; j <= 2000; ++j) explicit_tail += r.sqrt.c[j] * r.sqrt.c[j];
    EXPECT_GE(example5_c_tail_sq(1000), explicit_tail);
}

TEST(Example6, ShortHorizonReport) {
    const auto r = example6_build(1 << 12);
    EXPECT_EQ(r.trace_grid.front(), 2u);
    EXPECT_EQ(r.trace_grid.back(), 4096u);
    EXPECT_LE(r.bbar0_min, r.bbar0_max);
    EXPECT_LT(r.max_abs_c_scaled, 1.0);
    EXPECT_NEAR(r.bbar_norm_sq.back(), r.bars.bbar_norm_sq[4096], 1e-15);
}
