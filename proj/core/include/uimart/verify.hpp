#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "uimart/config.hpp"

namespace uimart {

/// One comparison inside a criterion.
struct Check {
    std::string label;
    bool passed = false;
    std::string detail;
};

struct CriterionResult {
    int id = 0;
    std::string name;
    std::vector<Check> checks;

    [[nodiscard]] bool passed() const;
};

struct VerifyReport {
    std::vector<CriterionResult> criteria;
    /// Informational lines; never affect pass/fail.
    std::vector<std::string> notes;

    [[nodiscard]] bool passed() const;
    [[nodiscard]] std::vector<int> failing() const;
};

struct VerifyOptions {
    ExperimentConfig config = ExperimentConfig{};
    /// Replaces c_0 in every c-sequence used for sampling. Mutation testing only.
    std::optional<double> faulty_c0;
    std::size_t y_draws = 1'000'000;
    /// Re-runs a reduced battery with 1 and 8 workers and compares report bytes.
    bool check_reproducibility = true;
};

/// Path count used for tolerance scaling: at this size tolerances are the
/// nominal ones; smaller runs widen them by sqrt(kReferencePaths / n).
inline constexpr std::size_t kReferencePaths = 100'000;

/// Defaults sized for a run of a few minutes (10^5 paths), or 10^4 paths
/// with `quick`.
ExperimentConfig default_verify_config(bool quick);

/// Runs the battery and writes its report files into config.output_dir.
/// Progress goes to `log`.
VerifyReport run_verification(const VerifyOptions& options, std::ostream& log);

/// Human-readable table: one line per criterion, failing checks indented.
void print_report(const VerifyReport& report, std::ostream& out);

/// run_verification + print_report; returns the process exit code
/// (0 iff every criterion passed).
int cmd_verify(const VerifyOptions& options, std::ostream& out, std::ostream& log);

}  // namespace uimart
