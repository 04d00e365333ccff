#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "uimart/errors.hpp"
#include "uimart/parallel.hpp"
#include "uimart/paths.hpp"
#include "uimart/rng.hpp"

using namespace uimart;

namespace {

SamplePath make_path(std::vector<double> values) {
    SamplePath p;
    p.values = std::move(values);
    return p;
}

}  // namespace

TEST(TimeGrid, ExactMultipleOfStep) {
    TimeGrid const g = make_uniform_grid(1.0, 0.5);
    EXPECT_EQ(g.times(), (std::vector<double>{0.0, 0.5, 1.0}));
}

TEST(TimeGrid, CeilingCoversHorizon) {
    TimeGrid const g = make_uniform_grid(1.0, 0.3);
    auto const t = g.times();
    ASSERT_EQ(t.size(), 5u);
    EXPECT_DOUBLE_EQ(t.back(), 1.2);
    EXPECT_DOUBLE_EQ(t[2], 0.6);
    EXPECT_TRUE(std::is_sorted(t.begin(), t.end()));
}

TEST(TimeGrid, RejectsBadInput) {
    EXPECT_THROW(make_uniform_grid(1.0, 0.0), InvalidArgument);
    EXPECT_THROW(make_uniform_grid(0.0, 0.1), InvalidArgument);
    EXPECT_THROW(make_uniform_grid(-1.0, 0.1), InvalidArgument);
    EXPECT_THROW(make_uniform_grid(1.0, std::nan("")), InvalidArgument);
    EXPECT_THROW(make_uniform_grid(1.0e9, 1.0), ResourceLimit);
    EXPECT_THROW(make_uniform_grid(10.0, 1.0, 5), ResourceLimit);
}

TEST(PathFunctionals, Sup) {
    EXPECT_EQ(path_sup(make_path({1.0, 1.5, 0.2})), 1.5);
    EXPECT_EQ(path_sup(make_path({1.0, 1.0, 1.0})), 1.0);
    EXPECT_EQ(path_sup(make_path({1.0, 2.0, 4.0, 0.0})), 4.0);
    EXPECT_THROW(path_sup(make_path({})), InvalidArgument);
}

TEST(PathFunctionals, Terminal) {
    EXPECT_EQ(path_terminal(make_path({1.0, 2.2, 2.2})), 2.2);
    EXPECT_EQ(path_terminal(make_path({1.0, 2.0, 0.0})), 0.0);
    EXPECT_THROW(path_terminal(make_path({})), InvalidArgument);
}

TEST(PathFunctionals, RealizedQuadraticVariation) {
    EXPECT_DOUBLE_EQ(realized_qv(make_path({1.0, 2.0, 0.0})), 5.0);
    EXPECT_EQ(realized_qv(make_path({1.0, 1.0, 1.0})), 0.0);
    EXPECT_NEAR(realized_qv(make_path({1.0, 1.5, 2.2})), 0.74, 1e-15);
}

TEST(PathFunctionals, QuadraticVariationIgnoresConstantPadding) {
    SamplePath p = make_path({1.0, 1.7, 0.4, 0.9});
    double const qv = realized_qv(p);
    for (int i = 0; i < 10; ++i) p.values.push_back(0.9);
    EXPECT_EQ(realized_qv(p), qv);
}

TEST(PathValidation, RejectsNegativeAndNonConstantTail) {
    SamplePath p = make_path({1.0, -0.1});
    EXPECT_THROW(validate_path(p), InvalidArgument);
    p = make_path({1.0, 0.5, 0.3});
    p.absorbed_at = 1;
    EXPECT_THROW(validate_path(p), InvalidArgument);
    p.values = {1.0, 0.5, 0.5};
    EXPECT_NO_THROW(validate_path(p));
}

TEST(DeriveSeed, Deterministic) {
    static_assert(derive_seed(42, 7) == derive_seed(42, 7));
    EXPECT_EQ(derive_seed(20240601, 123), derive_seed(20240601, 123));
    EXPECT_NE(derive_seed(20240601, 123), derive_seed(20240601, 124));
    EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
}

TEST(DeriveSeed, SameUnderAnyWorkerCount) {
    constexpr std::size_t n = 10'000;
    std::vector<std::uint64_t> one(n), many(n);
    parallel_for_index(n, 1, [&](std::size_t i) { one[i] = derive_seed(99, i); });
    parallel_for_index(n, 8, [&](std::size_t i) { many[i] = derive_seed(99, i); });
    EXPECT_EQ(one, many);
}

TEST(DeriveSeed, NoCollisionsOverAMillionIndices) {
    for (std::uint64_t master : {0ULL, 20240601ULL, 0xffffffffffffffffULL}) {
        std::vector<std::uint64_t> seeds(1'000'000);
        for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = derive_seed(master, i);
        std::sort(seeds.begin(), seeds.end());
        EXPECT_EQ(std::adjacent_find(seeds.begin(), seeds.end()), seeds.end()) << master;
    }
}

TEST(DeriveSeed, AvalancheOnBothInputs) {
    Rng rng(12345);
    constexpr int trials = 100'000;
    double master_flips = 0.0;
    double index_flips = 0.0;
    for (int t = 0; t < trials; ++t) {
        std::uint64_t const m = rng.bits();
        std::uint64_t const i = rng.bits();
        int const b = static_cast<int>(rng.bits() & 63);
        std::uint64_t const base = derive_seed(m, i);
        master_flips += std::popcount(base ^ derive_seed(m ^ (1ULL << b), i));
        index_flips += std::popcount(base ^ derive_seed(m, i ^ (1ULL << b)));
    }
    double const rate_m = master_flips / (64.0 * trials);
    double const rate_i = index_flips / (64.0 * trials);
    EXPECT_GE(rate_m, 0.4);
    EXPECT_LE(rate_m, 0.6);
    EXPECT_GE(rate_i, 0.4);
    EXPECT_LE(rate_i, 0.6);
}

TEST(DeriveSeed, NamespacesAreSeparate) {
    for (std::uint64_t i = 0; i < 1000; ++i) {
        EXPECT_NE(stream_seed(5, SeedNamespace::path, i),
                  stream_seed(5, SeedNamespace::threshold, i));
    }
}

TEST(Rng, UniformIsOpenAndNormalHasUnitVariance) {
    Rng rng(7);
    double sum = 0.0, sq = 0.0;
    constexpr int n = 200'000;
    for (int i = 0; i < n; ++i) {
        double const u = rng.uniform_open();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        double const z = rng.normal();
        sum += z;
        sq += z * z;
    }
    EXPECT_NEAR(sum / n, 0.0, 4.0 / std::sqrt(n));
    EXPECT_NEAR(sq / n, 1.0, 4.0 * std::sqrt(2.0 / n));
}
