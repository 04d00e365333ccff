#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "uimart/construction.hpp"
#include "uimart/errors.hpp"
#include "uimart/rng.hpp"

using namespace uimart;

namespace {

SamplePath discrete(std::vector<double> values) {
    SamplePath p;
    p.values = std::move(values);
    return p;
}

SamplePath continuous(std::vector<double> values) {
    SamplePath p;
    p.kind = PathKind::continuous_grid;
    for (std::size_t k = 0; k < values.size(); ++k) p.times.push_back(0.1 * static_cast<double>(k));
    p.values = std::move(values);
    return p;
}

InverseBessel3Params coarse_bessel() {
    InverseBessel3Params p;
    p.grid = make_uniform_grid(1.0e4, 1.0e-2);
    return p;
}

}  // namespace

TEST(CSequence, InverseBesselValues) {
    auto const seq = CSequence::inverse_bessel();
    EXPECT_EQ(seq.value(0), 1.0);
    EXPECT_NEAR(seq.value(1), 1.313261687518223, 1e-14);
    EXPECT_NEAR(seq.value(10), std::log(std::numbers::e + 2.9289682539682538), 1e-14);
    double prev = seq.value(0);
    for (std::uint64_t n = 1; n < 5000; ++n) {
        double const c = seq.value(n);
        EXPECT_GE(c, prev);
        prev = c;
    }
}

TEST(CSequence, HarmonicTableJoinsAsymptoticSeamlessly) {
    double const below = harmonic_number(kThresholdCap);
    double const above = harmonic_number(kThresholdCap + 1);
    EXPECT_NEAR(above - below, 1.0 / static_cast<double>(kThresholdCap + 1), 1e-13);
}

TEST(CSequence, DoubleOrNothingMatchesDirectSum) {
    auto const seq = CSequence::double_or_nothing();
    double sum = 0.0;
    for (std::uint64_t k = 1; k <= 5000; ++k) {
        sum += std::ldexp(1.0, -(static_cast<int>(std::floor(std::log2(static_cast<double>(k)))) + 1));
        ASSERT_NEAR(seq.tail_sum(k), sum, 1e-12) << k;
    }
}

TEST(CSequence, EmpiricalCoverage) {
    auto const zero = CSequence::empirical({0.0, 0.0, 0.0});
    EXPECT_EQ(zero.value(0), 1.0);
    EXPECT_EQ(zero.value(3), 1.0);
    EXPECT_THROW((void)zero.value(4), InsufficientData);
    EXPECT_EQ(zero.coverage(), 3u);
    EXPECT_THROW(CSequence::empirical({0.5, -0.1}), InvalidArgument);
    EXPECT_THROW(CSequence::empirical({1.5}), InvalidArgument);

    auto const seq = CSequence::empirical({1.0, 0.5, 0.25});
    EXPECT_NEAR(seq.value(2), std::log(std::numbers::e + 1.5), 1e-15);
    // Bounded over its coverage, so the law of Y is not determined.
    EXPECT_THROW(y_quantile(seq, 0.99), InsufficientData);
}

TEST(YQuantile, SmallU) {
    auto const seq = CSequence::inverse_bessel();
    EXPECT_EQ(y_quantile(seq, 1e-12), ThresholdSample::exact(1));
    EXPECT_EQ(y_quantile(seq, 0.1), ThresholdSample::exact(1));
    EXPECT_THROW(y_quantile(seq, 0.0), InvalidArgument);
    EXPECT_THROW(y_quantile(seq, 1.0), InvalidArgument);
}

TEST(YQuantile, MedianMatchesBruteForceHarmonicScan) {
    // Smallest n with ln(e + H_n) >= 2, by direct summation.
    double h = 0.0;
    std::uint64_t n = 0;
    while (std::log(std::numbers::e + h) < 2.0) {
        ++n;
        h += 1.0 / static_cast<double>(n);
    }
    EXPECT_EQ(n, 60u);
    auto const y = y_quantile(CSequence::inverse_bessel(), 0.5);
    ASSERT_TRUE(y.is_exact());
    EXPECT_EQ(*y.exact_value(), n);
}

TEST(YQuantile, BeyondCapIsLogMagnitude) {
    auto const seq = CSequence::inverse_bessel();
    double const u_cap = 1.0 - 1.0 / seq.value(kThresholdCap);
    auto const y = y_quantile(seq, u_cap + 0.01);
    EXPECT_FALSE(y.is_exact());
    EXPECT_GT(y.log2_value(), std::log2(static_cast<double>(kThresholdCap)));
    auto const huge = y_quantile(seq, 1.0 - 1e-9);
    EXPECT_FALSE(huge.is_exact());
    EXPECT_GT(huge.log2_value(), y.log2_value());
}

TEST(YQuantile, MonotoneCoupling) {
    auto const seq = CSequence::inverse_bessel();
    Rng rng(3);
    for (int i = 0; i < 2000; ++i) {
        double a = rng.uniform_open();
        double b = rng.uniform_open();
        if (a > b) std::swap(a, b);
        EXPECT_LE(y_quantile(seq, a).log2_value(), y_quantile(seq, b).log2_value());
    }
}

TEST(YQuantile, PmfSumsToCdf) {
    auto const seq = CSequence::inverse_bessel();
    double total = 0.0;
    for (std::uint64_t n = 1; n <= 1000; ++n) {
        double const p = seq.y_pmf(n);
        EXPECT_GE(p, 0.0);
        total += p;
    }
    EXPECT_NEAR(total, 1.0 - 1.0 / seq.value(1000), 1e-12);
}

TEST(SampleY, FrequenciesMatchLaw) {
    auto const seq = CSequence::inverse_bessel();
    constexpr std::size_t n = 1'000'000;
    std::size_t ones = 0, above10 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        auto const y = sample_Y(seq, stream_seed(777, SeedNamespace::threshold, i));
        ones += y.is_exact() && *y.exact_value() == 1;
        above10 += !y.is_exact() || *y.exact_value() > 10;
    }
    double const p1 = 1.0 - 1.0 / seq.value(1);
    double const p10 = 1.0 / seq.value(10);
    EXPECT_NEAR(p1, 0.2386, 1e-4);
    EXPECT_NEAR(static_cast<double>(ones) / n, p1, 3.0 * std::sqrt(p1 * (1 - p1) / n));
    EXPECT_NEAR(static_cast<double>(above10) / n, p10, 3.0 * std::sqrt(p10 * (1 - p10) / n));
}

TEST(FirstExceedance, Examples) {
    auto const r = first_exceedance(discrete({1.0, 1.5, 2.2, 0.8}), ThresholdSample::exact(2));
    EXPECT_TRUE(r.hit);
    EXPECT_EQ(r.sigma_index, 2u);

    auto const never = first_exceedance(discrete({1.0, 1.5, 2.2, 0.8}), ThresholdSample::exact(5));
    EXPECT_FALSE(never.hit);
    EXPECT_FALSE(never.sigma_index.has_value());

    auto const strict = first_exceedance(discrete({1.0, 2.0, 4.0, 0.0}), ThresholdSample::exact(2));
    EXPECT_EQ(strict.sigma_index, 2u);

    auto const big = first_exceedance(discrete({1.0, 1e9}), ThresholdSample::log_magnitude(40.0));
    EXPECT_FALSE(big.hit);
    EXPECT_THROW(first_exceedance(discrete({}), ThresholdSample::exact(1)), InvalidArgument);
}

TEST(StopPath, DiscreteHoldsJumpValue) {
    SamplePath const p = discrete({1.0, 1.5, 2.2, 0.8});
    auto const r = first_exceedance(p, ThresholdSample::exact(2));
    SamplePath const s = stop_path(p, r);
    EXPECT_EQ(s.values, (std::vector<double>{1.0, 1.5, 2.2, 2.2}));
    EXPECT_EQ(stop_path(s, r).values, s.values);
}

TEST(StopPath, ContinuousHoldsThreshold) {
    SamplePath const p = continuous({1.0, 1.5, 2.2, 0.8});
    auto const r = first_exceedance(p, ThresholdSample::exact(2));
    EXPECT_NEAR(r.overshoot, 0.2, 1e-15);
    SamplePath const s = stop_path(p, r);
    EXPECT_EQ(s.values, (std::vector<double>{1.0, 1.5, 2.0, 2.0}));
    EXPECT_EQ(stop_path(s, r).values, s.values);
}

TEST(StopPath, NeverHitIsIdentityAndMismatchIsRejected) {
    SamplePath const p = discrete({1.0, 1.5, 2.2, 0.8});
    auto const none = first_exceedance(p, ThresholdSample::exact(5));
    EXPECT_EQ(stop_path(p, none).values, p.values);

    auto const other = first_exceedance(discrete({1.0, 3.0}), ThresholdSample::exact(2));
    EXPECT_THROW(stop_path(p, other), InvalidArgument);
    EXPECT_THROW(stop_path(discrete({1.0, 6.0}), none), InvalidArgument);
}

TEST(Stopping, PathwiseMonotoneInThreshold) {
    auto const params = coarse_bessel();
    for (std::uint64_t s = 0; s < 200; ++s) {
        SamplePath const p = simulate_inverse_bessel3(s, params);
        std::optional<std::size_t> prev_sigma;
        double prev_sup = 0.0;
        for (std::uint64_t y = 1; y <= 16; ++y) {
            auto const r = first_exceedance(p, ThresholdSample::exact(y));
            double const sup = path_sup(stop_path(p, r));
            if (prev_sigma && r.sigma_index) EXPECT_LE(*prev_sigma, *r.sigma_index);
            // Once a level is never exceeded, no higher level is.
            if (y > 1 && !prev_sigma) EXPECT_FALSE(r.sigma_index.has_value());
            EXPECT_LE(prev_sup, sup);
            prev_sigma = r.sigma_index;
            prev_sup = sup;
        }
    }
}

TEST(BuildStoppedEnsemble, IndependentOfWorkerCount) {
    auto const seq = CSequence::inverse_bessel();
    auto const a = build_stopped_ensemble(coarse_bessel(), 300, 99, seq, 1);
    auto const b = build_stopped_ensemble(coarse_bessel(), 300, 99, seq, 8);
    ASSERT_EQ(a.entries.size(), b.entries.size());
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
        EXPECT_EQ(a.entries[i].path.values, b.entries[i].path.values);
        EXPECT_EQ(a.entries[i].record.threshold, b.entries[i].record.threshold);
        EXPECT_EQ(a.entries[i].record.sigma_index, b.entries[i].record.sigma_index);
    }
}

TEST(BuildStoppedEnsemble, ContractsOnEachRow) {
    auto const seq = CSequence::inverse_bessel();
    auto const params = coarse_bessel();
    auto const ens = build_stopped_ensemble(params, 2000, 4, seq, 1);
    std::size_t y1 = 0, y1_hit = 0;
    for (std::size_t i = 0; i < ens.entries.size(); ++i) {
        auto const& e = ens.entries[i];
        SamplePath const raw = simulate_inverse_bessel3(stream_seed(4, SeedNamespace::path, i), params);
        if (!e.record.hit) {
            EXPECT_EQ(path_sup(e.path), path_sup(raw));
        } else {
            EXPECT_EQ(path_terminal(e.path), e.record.threshold.value());
            EXPECT_GE(e.record.overshoot, 0.0);
        }
        if (e.record.threshold == ThresholdSample::exact(1)) {
            ++y1;
            y1_hit += e.record.hit;
        }
    }
    ASSERT_GT(y1, 300u);
    // P(sup > 1) = 1; the start-up refinement keeps the grid miss rate tiny.
    EXPECT_GE(static_cast<double>(y1_hit) / y1, 0.99);
}

TEST(DonConstructionOracle, MatchesThresholdByThresholdSum) {
    constexpr int depth = 10;
    auto const seq = CSequence::double_or_nothing();
    DonConstructionOracle const oracle(depth, seq);
    DonEnumeration const e(depth);
    std::uint64_t const top = (1u << depth) - 1;
    for (double level : {1.0, 2.0, 3.0, 8.0, 100.0}) {
        double brute = 0.0;
        for (std::uint64_t y = 1; y <= top; ++y) brute += seq.y_pmf(y) * e.stopped_sup_tail(y, level);
        brute += seq.y_survival(top) * e.sup_tail(level);
        EXPECT_NEAR(oracle.stopped_sup_tail(level), brute, 1e-12) << level;
    }
    double mass = 0.0;
    for (auto const& a : oracle.atoms()) mass += a.probability;
    EXPECT_NEAR(mass, 1.0, 1e-12);
}

TEST(DonConstructionOracle, PaperLowerBoundHolds) {
    auto const seq = CSequence::double_or_nothing();
    DonConstructionOracle const oracle(20, seq);
    DonEnumeration const e(20);
    for (std::uint64_t n = 1; n <= 1000; ++n) {
        double const lhs = oracle.stopped_sup_tail(static_cast<double>(n));
        double const rhs = e.sup_tail(static_cast<double>(n)) / seq.value(n);
        EXPECT_GE(lhs, rhs * (1.0 - 1e-12)) << n;
    }
}
