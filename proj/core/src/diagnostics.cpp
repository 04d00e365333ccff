#include "uimart/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <utility>

#include "uimart/errors.hpp"
#include "uimart/numeric.hpp"

namespace uimart {

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
    if (trials == 0) throw InvalidArgument("wilson_interval: no trials");
    if (successes > trials) throw InvalidArgument("wilson_interval: successes > trials");
    double const n = static_cast<double>(trials);
    double const p = static_cast<double>(successes) / n;
    double const z2 = z * z;
    double const denom = 1.0 + z2 / n;
    double const centre = (p + z2 / (2.0 * n)) / denom;
    double const half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    Interval ci{std::max(0.0, centre - half), std::min(1.0, centre + half)};
    // Pin the exact endpoints so the interval always contains p-hat.
    if (successes == 0) ci.low = 0.0;
    if (successes == trials) ci.high = 1.0;
    return ci;
}

namespace {

ProportionEstimate proportion(std::uint64_t successes, std::uint64_t trials) {
    ProportionEstimate out;
    out.successes = successes;
    out.trials = trials;
    out.estimate = static_cast<double>(successes) / static_cast<double>(trials);
    out.se = std::sqrt(out.estimate * (1.0 - out.estimate) / static_cast<double>(trials));
    out.ci = wilson_interval(successes, trials);
    return out;
}

}  // namespace

Estimate mean_estimate(std::span<const double> xs) {
    MeanSe const ms = mean_and_se(xs);
    return {ms.mean, ms.se, {ms.mean - kZ95 * ms.se, ms.mean + kZ95 * ms.se}};
}

ProportionEstimate tail_probability(std::span<const double> sups, double level) {
    if (sups.empty()) throw InvalidArgument("tail_probability: empty ensemble");
    if (!(level >= 0.0)) throw InvalidArgument("tail_probability: level must be >= 0");
    auto const count = static_cast<std::uint64_t>(
        std::count_if(sups.begin(), sups.end(), [level](double s) { return s > level; }));
    return proportion(count, sups.size());
}

TailTable tail_table(std::span<const double> sups, std::uint64_t m) {
    if (sups.empty()) throw InvalidArgument("tail_table: empty ensemble");
    if (m < 1) throw InvalidArgument("tail_table: m must be >= 1");
    // A sup s is above exactly the levels n = 1..ceil(s)-1.
    std::vector<std::uint64_t> top_level(m + 2, 0);
    for (double s : sups) {
        double const above = std::ceil(s) - 1.0;
        std::uint64_t const k =
            above <= 0.0 ? 0
                         : (above >= static_cast<double>(m) ? m
                                                            : static_cast<std::uint64_t>(above));
        ++top_level[k];
    }
    TailTable t;
    t.n_paths = sups.size();
    t.levels.resize(m);
    t.estimates.resize(m);
    t.ci_low.resize(m);
    t.ci_high.resize(m);
    t.counts.resize(m);
    std::uint64_t running = 0;
    for (std::uint64_t n = m; n >= 1; --n) {
        running += top_level[n];
        auto const p = proportion(running, sups.size());
        t.levels[n - 1] = n;
        t.counts[n - 1] = running;
        t.estimates[n - 1] = p.estimate;
        t.ci_low[n - 1] = p.ci.low;
        t.ci_high[n - 1] = p.ci.high;
    }
    return t;
}

CSequence empirical_c_sequence(const TailTable& table) {
    return CSequence::empirical(table.estimates);
}

SeriesReport tail_series(std::span<const double> tails, std::uint64_t m, const CSequence* seq) {
    if (tails.size() < m) {
        throw InsufficientData("tail_series: tails cover " + std::to_string(tails.size()) +
                               " levels, requested " + std::to_string(m));
    }
    SeriesReport out;
    out.partial_sums.resize(m);
    NeumaierSum acc;
    for (std::uint64_t n = 0; n < m; ++n) {
        acc.add(tails[n]);
        out.partial_sums[n] = acc.value();
    }
    if (seq) {
        out.analytic_bound.resize(m);
        for (std::uint64_t n = 1; n <= m; ++n) out.analytic_bound[n - 1] = divergence_bound(*seq, n);
    }
    return out;
}

SeriesReport tail_series(const TailTable& table, std::uint64_t m, const CSequence* seq) {
    return tail_series(std::span<const double>(table.estimates), m, seq);
}

double divergence_bound(const CSequence& seq, std::uint64_t m) {
    if (m < 1) throw InvalidArgument("divergence_bound: m must be >= 1");
    // e^{c_m} - e is the tail sum itself; evaluating it directly avoids the
    // cancellation in exp(log(e + S)) - e.
    return seq.tail_sum(m) / seq.value(m);
}

double stopped_tail_inverse_bessel(const CSequence& seq, std::uint64_t n) {
    if (n < 1) throw InvalidArgument("stopped_tail_inverse_bessel: n must be >= 1");
    return 1.0 / (static_cast<double>(n) * seq.value(n));
}

Estimate truncated_sup_mean(std::span<const double> sups, double cap) {
    if (!(cap > 0.0)) throw InvalidArgument("truncated_sup_mean: K must be positive");
    if (sups.empty()) throw InvalidArgument("truncated_sup_mean: empty ensemble");
    std::vector<double> clipped(sups.size());
    std::transform(sups.begin(), sups.end(), clipped.begin(),
                   [cap](double s) { return std::min(s, cap); });
    return mean_estimate(clipped);
}

Estimate h1_norm_truncated(std::span<const double> qvs, double cap) {
    if (!(cap > 0.0)) throw InvalidArgument("h1_norm_truncated: K must be positive");
    if (qvs.empty()) throw InvalidArgument("h1_norm_truncated: empty ensemble");
    std::vector<double> clipped(qvs.size());
    std::transform(qvs.begin(), qvs.end(), clipped.begin(),
                   [cap](double q) { return std::min(std::sqrt(q), cap); });
    return mean_estimate(clipped);
}

double truncated_sup_mean_inverse_bessel(const CSequence& seq, double cap) {
    if (!(cap > 0.0)) throw InvalidArgument("truncated_sup_mean_inverse_bessel: K must be positive");
    if (cap <= 1.0) return cap;
    NeumaierSum acc;
    acc.add(1.0);
    auto const whole = static_cast<std::uint64_t>(std::floor(cap));
    for (std::uint64_t k = 1; k < whole; ++k) {
        double const kd = static_cast<double>(k);
        acc.add(std::log1p(1.0 / kd) / seq.value(k));
    }
    acc.add(std::log(cap / static_cast<double>(whole)) / seq.value(whole));
    return acc.value();
}

Estimate terminal_mean_truncated(std::span<const double> terminals,
                                 std::span<const std::uint64_t> y_exact,
                                 std::uint64_t y_max) {
    if (terminals.size() != y_exact.size()) {
        throw InvalidArgument("terminal_mean_truncated: column length mismatch");
    }
    if (terminals.empty()) throw InvalidArgument("terminal_mean_truncated: empty ensemble");
    if (y_max < 1) throw InvalidArgument("terminal_mean_truncated: y_max must be >= 1");
    std::vector<double> xs(terminals.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        bool const in = y_exact[i] != 0 && y_exact[i] <= y_max;
        xs[i] = in ? terminals[i] : 0.0;
    }
    return mean_estimate(xs);
}

Estimate ui_tail(std::span<const double> terminals, double cap) {
    if (!(cap >= 1.0)) throw InvalidArgument("ui_tail: K must be >= 1");
    if (terminals.empty()) throw InvalidArgument("ui_tail: empty ensemble");
    std::vector<double> xs(terminals.size());
    std::transform(terminals.begin(), terminals.end(), xs.begin(),
                   [cap](double x) { return x > cap ? x : 0.0; });
    return mean_estimate(xs);
}

SandwichResult sandwich_check(std::span<const double> sups) {
    if (sups.empty()) throw InvalidArgument("sandwich_check: empty ensemble");
    double const n = static_cast<double>(sups.size());
    NeumaierSum levels, lower, upper, total;
    for (double s : sups) {
        // Number of integer levels n >= 1 strictly below s.
        double const above = std::max(0.0, std::ceil(s) - 1.0);
        levels.add(above);
        total.add(s);
        lower.add(s - above);
        upper.add(1.0 - (s - above));
    }
    SandwichResult r;
    r.tail_sum = levels.value() / n;
    r.mean = total.value() / n;
    r.lower_slack = lower.value() / n;
    r.upper_slack = upper.value() / n;
    r.holds = r.lower_slack >= 0.0 && r.upper_slack >= 0.0;
    return r;
}

double total_variation(std::span<const double> sups, std::span<const double> terminals,
                       std::span<const JointAtom> exact) {
    if (sups.size() != terminals.size() || sups.empty()) {
        throw InvalidArgument("total_variation: bad columns");
    }
    std::map<std::pair<double, double>, double> diff;
    double const w = 1.0 / static_cast<double>(sups.size());
    for (std::size_t i = 0; i < sups.size(); ++i) diff[{sups[i], terminals[i]}] += w;
    for (auto const& a : exact) diff[{a.sup, a.terminal}] -= a.probability;
    NeumaierSum acc;
    for (auto const& [key, d] : diff) acc.add(std::abs(d));
    return 0.5 * acc.value();
}

}  // namespace uimart
