#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "uimart/construction.hpp"

namespace uimart {

inline constexpr double kZ95 = 1.959963984540054;

struct Interval {
    double low = 0.0;
    double high = 1.0;
};

/// Wilson score interval for `successes` out of `trials`.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = kZ95);

struct ProportionEstimate {
    double estimate = 0.0;
    double se = 0.0;  // binomial standard error sqrt(p(1-p)/n)
    Interval ci;
    std::uint64_t successes = 0;
    std::uint64_t trials = 0;
};

/// Mean with a normal-approximation 95% interval.
struct Estimate {
    double value = 0.0;
    double se = 0.0;
    Interval ci;
};

/// Sample mean with a normal-approximation 95% interval.
Estimate mean_estimate(std::span<const double> xs);

//---------------------------------------------------------------------------//
// Tails and the summability series
//---------------------------------------------------------------------------//

/// Fraction of sups strictly above `level`, with its Wilson interval.
ProportionEstimate tail_probability(std::span<const double> sups, double level);

struct TailTable {
    std::vector<std::uint64_t> levels;  // 1..m
    std::vector<double> estimates;
    std::vector<double> ci_low;
    std::vector<double> ci_high;
    std::vector<std::uint64_t> counts;
    std::size_t n_paths = 0;

    [[nodiscard]] std::uint64_t max_level() const noexcept { return levels.size(); }
};

/// P-hat(sup > n) for n = 1..m in O(n_paths + m).
TailTable tail_table(std::span<const double> sups, std::uint64_t m);

CSequence empirical_c_sequence(const TailTable& table);

struct SeriesReport {
    std::vector<double> partial_sums;    // S_1..S_m
    std::vector<double> analytic_bound;  // (e^{c_m} - e) / c_m, empty without a c-sequence
};

/// Partial sums of tails[0..m-1] (levels 1..m), paired with the divergence
/// bound when `seq` is given. Throws InsufficientData if tails cover < m levels.
SeriesReport tail_series(std::span<const double> tails, std::uint64_t m,
                         const CSequence* seq = nullptr);
SeriesReport tail_series(const TailTable& table, std::uint64_t m,
                         const CSequence* seq = nullptr);

/// (e^{c_m} - e) / c_m, i.e. (1/c_m) * sum_{k<=m} P(sup M > k).
double divergence_bound(const CSequence& seq, std::uint64_t m);

/// Stopped-tail law under independence of Y and M and path continuity:
/// P(sup M^sigma > n) = P(Y > n) * P(sup M > n) = 1 / (n c_n) for the inverse
/// Bessel model.
double stopped_tail_inverse_bessel(const CSequence& seq, std::uint64_t n);

//---------------------------------------------------------------------------//
// Truncated moments
//---------------------------------------------------------------------------//

Estimate truncated_sup_mean(std::span<const double> sups, double cap);
/// Mean of min(sqrt(qv), cap).
Estimate h1_norm_truncated(std::span<const double> qvs, double cap);

/// Analytic E[min(sup M^sigma, K)] for the stopped inverse Bessel process:
/// 1 + sum over unit cells of integral (1/u)(1/c_floor(u)) du.
double truncated_sup_mean_inverse_bessel(const CSequence& seq, double cap);

/// Mean of terminal * 1{Y exact and Y <= y_max}. y_exact[i] == 0 marks a
/// log-magnitude threshold, which never qualifies.
Estimate terminal_mean_truncated(std::span<const double> terminals,
                                 std::span<const std::uint64_t> y_exact,
                                 std::uint64_t y_max);

/// Mean of terminal * 1{terminal > K}.
Estimate ui_tail(std::span<const double> terminals, double cap);

//---------------------------------------------------------------------------//
// Layer-cake sandwich
//---------------------------------------------------------------------------//

struct SandwichResult {
    bool holds = false;
    double tail_sum = 0.0;     // sum_{n>=1} F-hat(sup > n)
    double mean = 0.0;         // mean(sup)
    double lower_slack = 0.0;  // mean - tail_sum
    double upper_slack = 0.0;  // 1 + tail_sum - mean
};

/// sum_n F-hat(sup > n) <= mean(sup) <= 1 + sum_n F-hat(sup > n), evaluated
/// exactly on the empirical law (per-path slacks are non-negative and are
/// summed without cancellation).
SandwichResult sandwich_check(std::span<const double> sups);

//---------------------------------------------------------------------------//

/// Binned (sup, terminal) law and its total-variation distance to a list of
/// exact atoms. Values are matched exactly (double-or-nothing values are
/// powers of two).
struct JointAtom {
    double sup = 0.0;
    double terminal = 0.0;
    double probability = 0.0;
};

double total_variation(std::span<const double> sups, std::span<const double> terminals,
                       std::span<const JointAtom> exact);

}  // namespace uimart
