#pragma once

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "uimart/config.hpp"
#include "uimart/construction.hpp"
#include "uimart/ensemble.hpp"

namespace uimart {

//---------------------------------------------------------------------------//
// Formatting
//---------------------------------------------------------------------------//

/// Shortest decimal string that parses back to the same double. Locale
/// independent; non-finite values print as "inf", "-inf" and "nan".
std::string format_double(double x);

/// `digits` significant digits in %g style, locale independent.
std::string format_sig(double x, int digits = 12);

using CsvRow = std::vector<std::string>;

struct CsvTable {
    CsvRow header;
    std::vector<CsvRow> rows;
};

/// Writes the table with '\n' line endings. Throws IoError on failure and
/// InvalidArgument if a row width differs from the header.
void write_csv(const std::filesystem::path& file, const CsvTable& table);

/// Creates `dir` (and parents); throws IoError if that fails.
void ensure_directory(const std::filesystem::path& dir);

//---------------------------------------------------------------------------//
// Manifest
//---------------------------------------------------------------------------//

struct StageTiming {
    std::string name;
    double seconds = 0.0;
};

/// Records everything needed to reproduce a run. Timing fields are
/// informational and never feed into any other output.
struct RunManifest {
    std::string command;
    std::string config_json;
    std::vector<SeedNamespace> seed_namespaces;
    std::vector<StageTiming> stages;
    std::vector<std::string> outputs;
    std::string started_utc;
    std::string finished_utc;

    /// Runs `fn` and appends its wall-clock time under `name`.
    template <class Fn>
    decltype(auto) time_stage(const std::string& name, Fn&& fn) {
        auto const t0 = std::chrono::steady_clock::now();
        struct Guard {
            RunManifest* self;
            std::string name;
            std::chrono::steady_clock::time_point t0;
            ~Guard() {
                std::chrono::duration<double> const dt = std::chrono::steady_clock::now() - t0;
                self->stages.push_back({name, dt.count()});
            }
        } guard{this, name, t0};
        return fn();
    }
};

std::string utc_timestamp();
std::string to_json(const RunManifest& manifest);
void write_manifest(const std::filesystem::path& file, const RunManifest& manifest);

//---------------------------------------------------------------------------//
// Report tables
//---------------------------------------------------------------------------//

/// The c-sequence a config asks for. Empirical mode runs a pilot ensemble on
/// the pilot seed stream and estimates tails for levels 1..tail_levels.
CSequence resolve_c_sequence(const ExperimentConfig& config, unsigned workers);

/// Exact reference values for one model and c-sequence.
class AnalyticReference {
  public:
    AnalyticReference(const ExperimentConfig& config, const CSequence& seq);

    [[nodiscard]] double raw_sup_tail(double level) const;
    [[nodiscard]] double stopped_sup_tail(std::uint64_t n) const;
    [[nodiscard]] double terminal_mean_truncated(std::uint64_t y_max) const;
    [[nodiscard]] double stopped_ui_tail(double cap) const;
    [[nodiscard]] double stopped_truncated_sup_mean(double cap) const;
    [[nodiscard]] double raw_truncated_sup_mean(double cap) const;
    [[nodiscard]] double raw_ui_tail(double cap) const;
    [[nodiscard]] double raw_terminal_mean() const;
    [[nodiscard]] double checkpoint_mean(double t) const;

  private:
    ModelTag model_;
    CSequence seq_;
    std::optional<DonEnumeration> enumeration_;
    std::optional<DonConstructionOracle> oracle_;
};

struct DiagnosticTables {
    CsvTable tails;             // stopped-ensemble tails
    CsvTable series;            // analytic partial sums vs the divergence bound
    CsvTable series_empirical;  // same from Monte Carlo tails
    CsvTable ui;                // truncated means and UI tails
};

DiagnosticTables build_diagnostic_tables(const Columns& cols, const ExperimentConfig& config,
                                         const CSequence& seq);

/// Writes tails.csv, series.csv, series_empirical.csv and ui.csv; returns
/// the file names.
std::vector<std::string> write_diagnostic_tables(const std::filesystem::path& dir,
                                                 const DiagnosticTables& tables);

CsvTable raw_summary_table(const std::vector<PathRecord>& records);
CsvTable stopped_table(const std::vector<PathRecord>& records);

//---------------------------------------------------------------------------//
// Commands
//---------------------------------------------------------------------------//

/// Raw-ensemble summaries (raw_paths.csv), plus paths.csv with --dump-paths.
RunManifest cmd_simulate(const ExperimentConfig& config, std::ostream& log);
/// Stopped-ensemble rows (stopped_paths.csv).
RunManifest cmd_construct(const ExperimentConfig& config, std::ostream& log);
/// Diagnostic tables for the stopped ensemble.
RunManifest cmd_diagnose(const ExperimentConfig& config, std::ostream& log);

/// Exact values at 12 significant digits. Queries: sup_tail, c, y_pmf,
/// stopped_tail, divergence_bound, enumeration (alias don_enumeration).
/// Throws UsageError for unknown queries or malformed arguments.
void cmd_oracle(const std::string& model, const std::string& query,
                const std::vector<std::string>& args, std::ostream& out);

}  // namespace uimart
