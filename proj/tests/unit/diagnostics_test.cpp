#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "uimart/diagnostics.hpp"
#include "uimart/errors.hpp"
#include "uimart/rng.hpp"

using namespace uimart;

TEST(Wilson, ZeroAndFullCounts) {
    Interval const zero = wilson_interval(0, 1000);
    EXPECT_EQ(zero.low, 0.0);
    EXPECT_GT(zero.high, 0.0);
    EXPECT_LT(zero.high, 4.0 / 1000);
    Interval const full = wilson_interval(1000, 1000);
    EXPECT_EQ(full.high, 1.0);
    EXPECT_THROW(wilson_interval(0, 0), InvalidArgument);
    EXPECT_THROW(wilson_interval(5, 4), InvalidArgument);
}

TEST(Wilson, CoverageCalibration) {
    Rng rng(2024);
    constexpr int reps = 1000;
    constexpr int n = 1000;
    constexpr double p = 0.25;
    int covered = 0;
    for (int r = 0; r < reps; ++r) {
        std::uint64_t k = 0;
        for (int i = 0; i < n; ++i) k += rng.uniform_open() < p;
        Interval const ci = wilson_interval(k, n);
        covered += ci.low <= p && p <= ci.high;
    }
    EXPECT_GE(covered, 930);
}

TEST(TailProbability, Basics) {
    std::vector<double> const sups{1.0, 1.5, 2.5, 4.0, 0.5};
    auto const p = tail_probability(sups, 1.0);
    EXPECT_EQ(p.successes, 3u);
    EXPECT_DOUBLE_EQ(p.estimate, 0.6);
    EXPECT_LE(p.ci.low, p.estimate);
    EXPECT_GE(p.ci.high, p.estimate);
    EXPECT_THROW(tail_probability(std::vector<double>{}, 1.0), InvalidArgument);

    auto const none = tail_probability(sups, 100.0);
    EXPECT_EQ(none.estimate, 0.0);
    EXPECT_LE(none.ci.high, 3.0 / 5 + 0.4);
}

TEST(TailTable, MatchesDirectCountsAndIsMonotone) {
    Rng rng(8);
    std::vector<double> sups(5000);
    for (auto& s : sups) s = 1.0 / rng.uniform_open();
    TailTable const t = tail_table(sups, 40);
    ASSERT_EQ(t.levels.size(), 40u);
    for (std::size_t i = 0; i < 40; ++i) {
        auto const direct = tail_probability(sups, static_cast<double>(i + 1));
        EXPECT_EQ(t.counts[i], direct.successes);
        EXPECT_EQ(t.estimates[i], direct.estimate);
        EXPECT_LE(t.ci_low[i], t.estimates[i]);
        EXPECT_GE(t.ci_high[i], t.estimates[i]);
        if (i) EXPECT_LE(t.estimates[i], t.estimates[i - 1]);
    }
    // Integer sups sit exactly on a level and are not above it.
    TailTable const exact = tail_table(std::vector<double>{2.0, 2.0, 3.0}, 3);
    EXPECT_EQ(exact.counts, (std::vector<std::uint64_t>{3, 1, 0}));
}

TEST(TailSeries, ExamplesAndCoverage) {
    std::vector<double> const zeros(10, 0.0);
    auto const z = tail_series(zeros, 10);
    for (double s : z.partial_sums) EXPECT_EQ(s, 0.0);

    auto const seq = CSequence::inverse_bessel();
    std::vector<double> tails;
    for (std::uint64_t n = 1; n <= 3; ++n) tails.push_back(stopped_tail_inverse_bessel(seq, n));
    auto const r = tail_series(tails, 3, &seq);
    double const s3 = 1.0 / seq.value(1) + 1.0 / (2.0 * seq.value(2)) + 1.0 / (3.0 * seq.value(3));
    EXPECT_NEAR(r.partial_sums[2], s3, 1e-15);
    ASSERT_EQ(r.analytic_bound.size(), 3u);
    EXPECT_THROW(tail_series(tails, 4), InsufficientData);
}

TEST(DivergenceBound, ValuesAndMonotonicity) {
    auto const seq = CSequence::inverse_bessel();
    EXPECT_NEAR(divergence_bound(seq, 1), 1.0 / std::log(std::numbers::e + 1.0), 1e-15);
    EXPECT_NEAR(divergence_bound(seq, 1), 0.7615, 1e-4);
    double prev = 0.0;
    for (std::uint64_t m = 1; m < 10000; ++m) {
        double const b = divergence_bound(seq, m);
        EXPECT_GE(b, prev);
        prev = b;
    }
    EXPECT_THROW(divergence_bound(seq, 0), InvalidArgument);
}

TEST(TruncatedSupMean, BelowStartLevelIsK) {
    std::vector<double> const sups{1.0, 3.0, 7.5};
    EXPECT_EQ(truncated_sup_mean(sups, 0.5).value, 0.5);
    EXPECT_DOUBLE_EQ(truncated_sup_mean(sups, 2.0).value, (1.0 + 2.0 + 2.0) / 3.0);
    EXPECT_THROW(truncated_sup_mean(sups, 0.0), InvalidArgument);
}

TEST(TruncatedSupMean, AnalyticMatchesQuadrature) {
    // 1 + integral_1^K du / (u c_floor(u)), Simpson's rule on each unit cell.
    auto const seq = CSequence::inverse_bessel();
    for (double k : {1.0, 2.5, 10.0, 100.0, 1000.0}) {
        double integral = 0.0;
        for (double a = 1.0; a < k; a += 1.0) {
            double const b = std::min(a + 1.0, k);
            double const c = 1.0 / seq.value(static_cast<std::uint64_t>(a));
            constexpr int steps = 512;
            double const h = (b - a) / steps;
            double s = 1.0 / a + 1.0 / b;
            for (int i = 1; i < steps; ++i) s += (i % 2 ? 4.0 : 2.0) / (a + i * h);
            integral += c * s * h / 3.0;
        }
        EXPECT_NEAR(truncated_sup_mean_inverse_bessel(seq, k), 1.0 + integral, 1e-9) << k;
    }
    EXPECT_EQ(truncated_sup_mean_inverse_bessel(seq, 0.25), 0.25);
}

TEST(H1NormTruncated, ConstantPathsAreZero) {
    std::vector<double> const qv(10, 0.0);
    EXPECT_EQ(h1_norm_truncated(qv, 5.0).value, 0.0);
    std::vector<double> const some{4.0, 100.0};
    EXPECT_DOUBLE_EQ(h1_norm_truncated(some, 5.0).value, (2.0 + 5.0) / 2.0);
}

TEST(TerminalMeanTruncated, OnlyExactThresholdsCount) {
    std::vector<double> const terminals{1.0, 2.0, 5.0, 0.0};
    std::vector<std::uint64_t> const y{1, 2, 0, 1};
    EXPECT_DOUBLE_EQ(terminal_mean_truncated(terminals, y, 1).value, 0.25);
    EXPECT_DOUBLE_EQ(terminal_mean_truncated(terminals, y, 2).value, 0.75);
    EXPECT_DOUBLE_EQ(terminal_mean_truncated(terminals, y, 1000).value, 0.75);
}

TEST(UiTail, Basics) {
    std::vector<double> const terminals{0.0, 2.0, 10.0, 0.5};
    EXPECT_DOUBLE_EQ(ui_tail(terminals, 1.0).value, 3.0);
    EXPECT_DOUBLE_EQ(ui_tail(terminals, 5.0).value, 2.5);
    EXPECT_THROW(ui_tail(terminals, 0.5), InvalidArgument);
}

TEST(Sandwich, HandComputedCases) {
    auto const one = sandwich_check(std::vector<double>{2.5});
    EXPECT_TRUE(one.holds);
    EXPECT_EQ(one.tail_sum, 2.0);
    EXPECT_EQ(one.mean, 2.5);
    EXPECT_EQ(one.lower_slack, 0.5);
    EXPECT_EQ(one.upper_slack, 0.5);

    auto const flat = sandwich_check(std::vector<double>(7, 1.0));
    EXPECT_TRUE(flat.holds);
    EXPECT_EQ(flat.tail_sum, 0.0);
    EXPECT_EQ(flat.mean, 1.0);
    EXPECT_EQ(flat.upper_slack, 0.0);
    EXPECT_THROW(sandwich_check(std::vector<double>{}), InvalidArgument);
}

TEST(TotalVariation, ExactAtomsAndMissingMass) {
    std::vector<JointAtom> const exact{{1.0, 0.0, 0.5}, {2.0, 0.0, 0.25}, {4.0, 4.0, 0.25}};
    std::vector<double> const sups{1.0, 1.0, 2.0, 4.0};
    std::vector<double> const terms{0.0, 0.0, 0.0, 4.0};
    EXPECT_NEAR(total_variation(sups, terms, exact), 0.0, 1e-15);
    std::vector<double> const odd_sups{8.0, 1.0, 2.0, 4.0};
    std::vector<double> const odd_terms{0.0, 0.0, 0.0, 4.0};
    EXPECT_NEAR(total_variation(odd_sups, odd_terms, exact), 0.25, 1e-15);
}
