#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "uimart/construction.hpp"
#include "uimart/models.hpp"
#include "uimart/paths.hpp"

namespace uimart {

/// Summary of one path after stopping at a threshold.
struct StoppedSummary {
    bool hit = false;
    std::optional<std::size_t> sigma_index;
    double sup = 0.0;
    double terminal = 0.0;
    double qv = 0.0;
    double overshoot = 0.0;
};

StoppedSummary summarize_stopped(const SamplePath& raw, const StoppingRecord& record);

/// Everything the estimators need from one path, computed while the path is
/// in memory and then discarded.
struct PathRecord {
    std::size_t index = 0;
    PathSummary raw;
    double checkpoint_value = 0.0;  // M at the checkpoint time, if requested

    // Construction (present when a c-sequence was supplied).
    std::optional<ThresholdSample> threshold;
    StoppedSummary stopped;

    // Stopped at a constant integer level (tau_n control), if requested.
    StoppedSummary control;
};

struct RunSpec {
    ModelParams model = InverseBessel3Params{};
    std::size_t n_paths = 0;
    std::uint64_t master_seed = 0;
    /// Seed stream for the paths; thresholds always use SeedNamespace::threshold.
    SeedNamespace path_stream = SeedNamespace::path;
    std::optional<CSequence> c_sequence;
    std::optional<std::uint64_t> control_level;
    std::optional<double> checkpoint_time;
    unsigned workers = 1;
};

/// Simulates every path of `spec` and reduces it to a PathRecord. Record i
/// depends only on (master_seed, i, spec), never on the worker count.
std::vector<PathRecord> run_paths(const RunSpec& spec);

/// Column views used by the estimators.
struct Columns {
    std::vector<double> raw_sup, raw_terminal, raw_qv, checkpoint;
    std::vector<double> stopped_sup, stopped_terminal, stopped_qv;
    std::vector<double> control_sup, control_terminal, control_qv;
    std::vector<std::uint64_t> y_exact;  // 0 for log-magnitude thresholds
};

Columns columns(const std::vector<PathRecord>& records);

}  // namespace uimart
