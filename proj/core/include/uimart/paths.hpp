#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace uimart {

//---------------------------------------------------------------------------//
// Time grids
//---------------------------------------------------------------------------//

inline constexpr std::size_t kDefaultMaxGridPoints = 100'000'000;

/// Uniform grid t_k = k * step, k = 0..ceil(horizon / step).
class TimeGrid {
  public:
    TimeGrid() = default;

    [[nodiscard]] double horizon() const noexcept { return horizon_; }
    [[nodiscard]] double step() const noexcept { return step_; }
    [[nodiscard]] std::size_t size() const noexcept { return n_steps_ + 1; }
    [[nodiscard]] std::size_t n_steps() const noexcept { return n_steps_; }
    [[nodiscard]] double time(std::size_t k) const noexcept {
        return static_cast<double>(k) * step_;
    }
    [[nodiscard]] std::vector<double> times() const;

  private:
    friend TimeGrid make_uniform_grid(double, double, std::size_t);
    TimeGrid(double horizon, double step, std::size_t n_steps)
        : horizon_(horizon), step_(step), n_steps_(n_steps) {}

    double horizon_ = 1.0;
    double step_ = 1.0;
    std::size_t n_steps_ = 1;
};

// Throws InvalidArgument for non-positive or non-finite inputs and
// ResourceLimit when the grid would exceed max_points.
TimeGrid make_uniform_grid(double horizon, double step,
                           std::size_t max_points = kDefaultMaxGridPoints);

//---------------------------------------------------------------------------//
// Sample paths
//---------------------------------------------------------------------------//

enum class PathKind { continuous_grid, discrete_step };

[[nodiscard]] const char* to_string(PathKind kind) noexcept;

/*!
 * One realized trajectory of a non-negative process.
 *
 * Values after `absorbed_at` are constant. A continuous path may end at its
 * absorption index instead of being padded out to the full grid; every path
 * functional is invariant under constant padding, so the two are equivalent.
 * `times` holds the physical time of each value for continuous paths
 * (empty for discrete-step paths, whose clock is the step index).
 */
struct SamplePath {
    PathKind kind = PathKind::discrete_step;
    std::vector<double> values;
    std::vector<double> times;
    std::optional<std::size_t> absorbed_at;
    bool truncated = false;
    std::uint64_t seed_id = 0;

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
    [[nodiscard]] bool empty() const noexcept { return values.empty(); }
};

// Checks the SamplePath invariants; throws InvalidArgument on violation.
void validate_path(const SamplePath& path);

double path_sup(const SamplePath& path);
double path_terminal(const SamplePath& path);
double realized_qv(const SamplePath& path);

double path_sup(std::span<const double> values);
double realized_qv(std::span<const double> values);

/// Per-path functionals; every estimator works from these.
struct PathSummary {
    std::uint64_t seed = 0;
    double sup = 0.0;
    double terminal = 0.0;
    double qv = 0.0;
    bool absorbed = false;
    bool truncated = false;
    std::size_t n_values = 0;
};

PathSummary summarize(const SamplePath& path);

//---------------------------------------------------------------------------//
// Seed derivation
//---------------------------------------------------------------------------//

namespace detail {
// SplitMix64 output function: a bijection on 64-bit words with full avalanche.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace detail

/// Stateless (master, index) -> seed mixing. Injective in `index` for a fixed
/// master and independent of evaluation order.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::uint64_t index) noexcept {
    std::uint64_t const keyed = detail::mix64(master + 0x9e3779b97f4a7c15ULL);
    return detail::mix64(keyed ^ (index * 0xd1b54a32d192ed03ULL +
                                  0x8cb92ba72f3d8dd7ULL));
}

/// Independent seed streams derived from one master seed.
enum class SeedNamespace : std::uint64_t {
    path = 0x7061746873ULL,       // "paths"
    threshold = 0x7468726573ULL,  // "thres"
    ladder = 0x6c61646472ULL,     // "laddr"
    pilot = 0x70696c6f74ULL,      // "pilot"
};

[[nodiscard]] const char* to_string(SeedNamespace ns) noexcept;

constexpr std::uint64_t stream_seed(std::uint64_t master, SeedNamespace ns,
                                    std::uint64_t index) noexcept {
    return derive_seed(derive_seed(master, static_cast<std::uint64_t>(ns)),
                       index);
}

//---------------------------------------------------------------------------//
// Ensembles
//---------------------------------------------------------------------------//

/// A materialized set of paths; path i was generated from
/// stream_seed(master_seed, SeedNamespace::path, i).
struct Ensemble {
    std::uint64_t master_seed = 0;
    std::string model_tag;
    std::vector<SamplePath> paths;

    [[nodiscard]] std::size_t n_paths() const noexcept { return paths.size(); }
};

}  // namespace uimart
