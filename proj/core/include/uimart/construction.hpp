#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "uimart/models.hpp"
#include "uimart/paths.hpp"

namespace uimart {

/// Thresholds above this are kept only as log2 magnitudes.
inline constexpr std::uint64_t kThresholdCap = 1'000'000;

//---------------------------------------------------------------------------//
// c-sequence
//---------------------------------------------------------------------------//

enum class CMode { closed_form_inverse_bessel, closed_form_don, empirical };

[[nodiscard]] const char* to_string(CMode mode) noexcept;

/*!
 * The non-decreasing sequence c_n = ln(e + sum_{k<=n} P(sup M > k)), with
 * c_0 = 1.
 *
 * Closed forms: inverse Bessel tails 1/k give c_n = ln(e + H_n); unbounded
 * double-or-nothing tails give a piecewise-linear partial sum per octave.
 * Empirical mode takes tail estimates for levels 1..m and refuses any index
 * past m. Instances are immutable; the harmonic table is built once and
 * shared.
 */
class CSequence {
  public:
    static CSequence inverse_bessel();
    static CSequence double_or_nothing();
    /// tails[k-1] estimates P(sup M > k) for k = 1..tails.size().
    static CSequence empirical(std::vector<double> tails);
    static CSequence for_model(ModelTag model);

    [[nodiscard]] CMode mode() const noexcept { return mode_; }

    /// Sum_{k<=n} P(sup M > k). Throws InsufficientData past the empirical coverage.
    [[nodiscard]] double tail_sum(std::uint64_t n) const;
    [[nodiscard]] double value(std::uint64_t n) const;
    /// Largest covered index (empirical mode only).
    [[nodiscard]] std::optional<std::uint64_t> coverage() const;

    /// P(Y > n) = 1 / c_n and P(Y = n) = 1/c_{n-1} - 1/c_n.
    [[nodiscard]] double y_survival(std::uint64_t n) const { return 1.0 / value(n); }
    [[nodiscard]] double y_pmf(std::uint64_t n) const;

    /// Copy whose c_0 is replaced; only for fault-injection tests of the
    /// verification battery.
    [[nodiscard]] CSequence with_faulty_c0(double c0) const;

  private:
    CSequence() = default;

    CMode mode_ = CMode::closed_form_inverse_bessel;
    std::shared_ptr<const std::vector<double>> prefix_;  // empirical partial sums
    double c0_ = 1.0;
};

double c_value(const CSequence& seq, std::uint64_t n);

/// H_n, exact (compensated) up to kThresholdCap, asymptotic beyond.
double harmonic_number(std::uint64_t n);

//---------------------------------------------------------------------------//
// Threshold Y
//---------------------------------------------------------------------------//

/// One draw of Y: an exact integer up to the cap, log2 Y beyond it.
class ThresholdSample {
  public:
    static ThresholdSample exact(std::uint64_t y, std::uint64_t cap = kThresholdCap);
    /// log2_y may be +inf when Y overflows double range.
    static ThresholdSample log_magnitude(double log2_y, std::uint64_t cap = kThresholdCap);

    [[nodiscard]] bool is_exact() const noexcept { return exact_.has_value(); }
    [[nodiscard]] std::optional<std::uint64_t> exact_value() const noexcept { return exact_; }
    [[nodiscard]] double log2_value() const noexcept { return log2_; }
    [[nodiscard]] std::uint64_t cap() const noexcept { return cap_; }
    /// Y as a double (may be +inf for log-magnitude samples).
    [[nodiscard]] double value() const noexcept;

    friend bool operator==(const ThresholdSample&, const ThresholdSample&) = default;

  private:
    ThresholdSample(std::optional<std::uint64_t> exact, double log2, std::uint64_t cap)
        : exact_(exact), log2_(log2), cap_(cap) {}

    std::optional<std::uint64_t> exact_;
    double log2_ = 0.0;
    std::uint64_t cap_ = kThresholdCap;
};

/// Smallest n >= 1 with P(Y <= n) = 1/c_0 - 1/c_n >= u.
ThresholdSample y_quantile(const CSequence& seq, double u,
                           std::uint64_t cap = kThresholdCap);

/// Inverse-CDF draw from a single uniform of the stream seeded by `seed`.
ThresholdSample sample_Y(const CSequence& seq, std::uint64_t seed,
                         std::uint64_t cap = kThresholdCap);

//---------------------------------------------------------------------------//
// Stopping
//---------------------------------------------------------------------------//

/// First strict exceedance of a threshold. With a constant integer threshold
/// n this is tau_n.
struct StoppingRecord {
    std::optional<std::size_t> sigma_index;
    ThresholdSample threshold = ThresholdSample::exact(1);
    bool hit = false;
    /// Grid value at sigma minus the threshold (0 when not hit).
    double overshoot = 0.0;
};

StoppingRecord first_exceedance(const SamplePath& path, const ThresholdSample& threshold);
StoppingRecord first_exceedance(std::span<const double> values,
                                const ThresholdSample& threshold);

/*!
 * The path stopped at sigma.
 *
 * Values before sigma are unchanged and every value from sigma on is held at
 * the stopped level. For discrete-step paths that level is the jump value
 * values[sigma]. For continuous-grid paths it is the threshold itself: the
 * continuous path crosses the threshold inside the step that ends at
 * sigma, and M_sigma = Y there. The grid overshoot stays in the record.
 */
SamplePath stop_path(const SamplePath& path, const StoppingRecord& record);

/// Level at which a path is held once stopped.
double stopped_level(PathKind kind, std::span<const double> values,
                     const StoppingRecord& record);

struct StoppedPath {
    SamplePath path;
    StoppingRecord record;
};

struct StoppedEnsemble {
    std::uint64_t master_seed = 0;
    std::string model_tag;
    std::vector<StoppedPath> entries;
};

/// Path i from the path seed stream, Y_i from the threshold seed stream.
StoppedEnsemble build_stopped_ensemble(const ModelParams& model, std::size_t n_paths,
                                       std::uint64_t master_seed, const CSequence& seq,
                                       unsigned workers);

//---------------------------------------------------------------------------//
// Exact construction laws for double-or-nothing
//---------------------------------------------------------------------------//

/// Exact law of the double-or-nothing process stopped at sigma with Y drawn
/// from `seq`, by enumeration. The stopped law depends on Y only through the
/// first power of two above Y, so thresholds are grouped by octave.
class DonConstructionOracle {
  public:
    struct Atom {
        double sup = 0.0;
        double terminal = 0.0;
        double probability = 0.0;
    };

    DonConstructionOracle(int max_depth, CSequence seq);

    [[nodiscard]] const std::vector<Atom>& atoms() const noexcept { return atoms_; }

    /// P(sup M^sigma > n).
    [[nodiscard]] double stopped_sup_tail(double n) const;
    /// E[M^sigma_inf * 1{Y <= y_max}], summed threshold by threshold.
    [[nodiscard]] double terminal_mean_truncated(std::uint64_t y_max) const;
    /// E[M^sigma_inf * 1{M^sigma_inf > K}].
    [[nodiscard]] double ui_tail(double cap) const;
    /// E[min(sup M^sigma, K)].
    [[nodiscard]] double truncated_sup_mean(double cap) const;

  private:
    DonEnumeration enumeration_;
    CSequence seq_;
    std::vector<Atom> atoms_;
};

}  // namespace uimart
