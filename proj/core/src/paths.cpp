#include "uimart/paths.hpp"

#include <algorithm>
#include <cmath>

#include "uimart/errors.hpp"
#include "uimart/numeric.hpp"

namespace uimart {

TimeGrid make_uniform_grid(double horizon, double step, std::size_t max_points) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw InvalidArgument("make_uniform_grid: horizon must be positive");
    }
    if (!(step > 0.0) || !std::isfinite(step)) {
        throw InvalidArgument("make_uniform_grid: step must be positive");
    }
    double const ratio = horizon / step;
    // Quotients like 0.7 / 0.1 land a hair off the integer they denote.
    double const nearest = std::round(ratio);
    double const n_steps = std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio)
                               ? nearest
                               : std::ceil(ratio);
    if (n_steps + 1.0 > static_cast<double>(max_points)) {
        throw ResourceLimit("make_uniform_grid: grid of " +
                            std::to_string(n_steps + 1.0) +
                            " points exceeds the configured maximum");
    }
    return TimeGrid(horizon, step, static_cast<std::size_t>(std::max(1.0, n_steps)));
}

std::vector<double> TimeGrid::times() const {
    std::vector<double> out(size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = time(k);
    return out;
}

const char* to_string(PathKind kind) noexcept {
    switch (kind) {
        case PathKind::continuous_grid: return "continuous-grid";
        case PathKind::discrete_step: return "discrete-step";
    }
    return "unknown";
}

const char* to_string(SeedNamespace ns) noexcept {
    switch (ns) {
        case SeedNamespace::path: return "path";
        case SeedNamespace::threshold: return "threshold";
        case SeedNamespace::ladder: return "ladder";
        case SeedNamespace::pilot: return "pilot";
    }
    return "unknown";
}

void validate_path(const SamplePath& path) {
    if (path.empty()) throw InvalidArgument("sample path is empty");
    for (double v : path.values) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw InvalidArgument("sample path has a negative or non-finite value");
        }
    }
    if (path.absorbed_at) {
        std::size_t const k = *path.absorbed_at;
        if (k >= path.size()) throw InvalidArgument("absorbed_at out of range");
        for (std::size_t j = k + 1; j < path.size(); ++j) {
            if (path.values[j] != path.values[k]) {
                throw InvalidArgument("sample path not constant after absorption");
            }
        }
    }
    if (!path.times.empty() && path.times.size() != path.size()) {
        throw InvalidArgument("sample path times/values length mismatch");
    }
}

double path_sup(std::span<const double> values) {
    if (values.empty()) throw InvalidArgument("path_sup: empty path");
    return *std::max_element(values.begin(), values.end());
}

double realized_qv(std::span<const double> values) {
    if (values.empty()) throw InvalidArgument("realized_qv: empty path");
    NeumaierSum acc;
    for (std::size_t k = 1; k < values.size(); ++k) {
        double const d = values[k] - values[k - 1];
        acc.add(d * d);
    }
    return acc.value();
}

double path_sup(const SamplePath& path) { return path_sup(std::span<const double>(path.values)); }

double path_terminal(const SamplePath& path) {
    if (path.empty()) throw InvalidArgument("path_terminal: empty path");
    return path.values.back();
}

double realized_qv(const SamplePath& path) {
    return realized_qv(std::span<const double>(path.values));
}

PathSummary summarize(const SamplePath& path) {
    PathSummary s;
    s.seed = path.seed_id;
    s.sup = path_sup(path);
    s.terminal = path_terminal(path);
    s.qv = realized_qv(path);
    s.absorbed = path.absorbed_at.has_value();
    s.truncated = path.truncated;
    s.n_values = path.size();
    return s;
}

}  // namespace uimart
