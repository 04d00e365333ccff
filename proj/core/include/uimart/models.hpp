#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "uimart/paths.hpp"

namespace uimart {

enum class ModelTag { inverse_bessel3, double_or_nothing };

[[nodiscard]] const char* to_string(ModelTag tag) noexcept;
// Accepts "inverse-bessel", "inverse-bessel3", "double-or-nothing", "don".
ModelTag parse_model_tag(std::string_view name);

//---------------------------------------------------------------------------//
// Inverse three-dimensional Bessel process
//---------------------------------------------------------------------------//

/*!
 * Parameters for M_t = 1 / |x_0 + W_t| with W a 3-d Brownian motion.
 *
 * The grid is uniform in an intrinsic clock: each tick moves W by an exact
 * Gaussian increment whose variance is chosen from the current radius r,
 *
 *     dt = r^2 * min(far_step, step * max(1, r^2)),
 *
 * so every step has the same relative resolution sqrt(step) while the path
 * is near or above its start level, and relative resolution sqrt(far_step)
 * once it has drifted far below it. The first `start_refinement` ticks are
 * shrunk geometrically (factor 2 per tick) because the path starts exactly
 * on level M_0 = 1, which it crosses immediately in continuous time.
 * grid.n_steps() bounds the number of ticks. Steps are shortened to land
 * exactly on each physical checkpoint.
 */
struct InverseBessel3Params {
    TimeGrid grid = make_uniform_grid(1.0e4, 1.0e-3);
    double far_step = 2.0e-2;
    int start_refinement = 24;
    double absorb_eps = 1.0e-4;
    std::array<double, 3> start_direction{1.0, 0.0, 0.0};
    std::vector<double> checkpoints{1.0};
};

void validate(const InverseBessel3Params& params);

SamplePath simulate_inverse_bessel3(std::uint64_t seed,
                                    const InverseBessel3Params& params);

/// Value at physical time t: the last recorded value at or before t.
/// Throws InvalidArgument if the path stopped (unabsorbed) before t.
double value_at_time(const SamplePath& path, double t);

//---------------------------------------------------------------------------//
// Double-or-nothing martingale
//---------------------------------------------------------------------------//

inline constexpr int kMaxDonDepth = 64;

struct DoubleOrNothingParams {
    int max_depth = kMaxDonDepth;
};

void validate(const DoubleOrNothingParams& params);

/// M_0 = 1; each step doubles or drops to 0 (absorbing) with probability 1/2.
/// The path always has max_depth + 1 values; survivors are flagged truncated.
SamplePath simulate_double_or_nothing(std::uint64_t seed,
                                      const DoubleOrNothingParams& params);

//---------------------------------------------------------------------------//

using ModelParams = std::variant<InverseBessel3Params, DoubleOrNothingParams>;

[[nodiscard]] ModelTag tag_of(const ModelParams& params) noexcept;
[[nodiscard]] std::string describe(const ModelParams& params);
SamplePath simulate(std::uint64_t seed, const ModelParams& params);

/// Generates paths 0..n_paths-1 from the path seed stream of `master_seed`.
Ensemble generate_ensemble(const ModelParams& params, std::size_t n_paths,
                           std::uint64_t master_seed, unsigned workers);

//---------------------------------------------------------------------------//
// Exact laws
//---------------------------------------------------------------------------//

/// P(sup_t M_t > a). Inverse Bessel: min(1, 1/a) (Doob's maximal identity).
/// Double-or-nothing (unbounded depth): 1 for a < 1, else 2^-(floor(log2 a)+1).
double exact_sup_tail(ModelTag model, double a);

/// E[M_t] for the inverse Bessel process started at M_0 = 1:
/// 2 * Phi(1 / sqrt(t)) - 1. Below 1 for every t > 0 (strict local martingale).
double inverse_bessel3_mean(double t);

/// One outcome of the double-or-nothing process run to a fixed depth.
struct DonAtom {
    int doublings = 0;  // number of successful steps before bust or truncation
    bool survived = false;
    double probability = 0.0;
    double sup = 1.0;
    double terminal = 0.0;
};

/// Complete law of the double-or-nothing process to max_depth:
/// atoms N = j (bust after j doublings) with probability 2^-(j+1) and the
/// survival atom with probability 2^-max_depth.
class DonEnumeration {
  public:
    explicit DonEnumeration(int max_depth);

    [[nodiscard]] int max_depth() const noexcept { return max_depth_; }
    [[nodiscard]] const std::vector<DonAtom>& atoms() const noexcept { return atoms_; }

    [[nodiscard]] double total_probability() const;
    [[nodiscard]] double sup_tail(double a) const;
    [[nodiscard]] double terminal_mean() const;

    /// Law of the process stopped at the first value strictly above
    /// `threshold` (an integer level >= 1).
    [[nodiscard]] std::vector<DonAtom> stopped_law(std::uint64_t threshold) const;
    [[nodiscard]] double stopped_terminal_mean(std::uint64_t threshold) const;
    [[nodiscard]] double stopped_sup_tail(std::uint64_t threshold, double a) const;

  private:
    int max_depth_;
    std::vector<DonAtom> atoms_;
};

// Throws ResourceLimit above kMaxDonDepth.
DonEnumeration enumerate_don(int max_depth);

}  // namespace uimart
