#include "uimart/report.hpp"

#include <charconv>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <ostream>
#include <system_error>

#include <json.hpp>

#include "uimart/diagnostics.hpp"
#include "uimart/errors.hpp"
#include "uimart/numeric.hpp"

#ifndef UIMART_VERSION_STRING
#define UIMART_VERSION_STRING "unknown"
#endif

namespace uimart {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string non_finite(double x) {
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

// Evaluates an analytic reference that may be undefined for the configured
// c-sequence (an empirical sequence that does not reach far enough).
template <class Fn>
double guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const InsufficientData&) {
        return kNaN;
    }
}

std::string hex_tag(std::uint64_t v) {
    char buf[24];
    auto const res = std::to_chars(buf, buf + sizeof buf, v, 16);
    return "0x" + std::string(buf, res.ptr);
}

RunSpec base_spec(const ExperimentConfig& config, unsigned workers) {
    RunSpec spec;
    spec.model = model_params(config);
    spec.n_paths = config.n_paths;
    spec.master_seed = config.master_seed;
    spec.workers = workers;
    return spec;
}

RunManifest start_manifest(const std::string& command, const ExperimentConfig& config) {
    validate(config);
    RunManifest m;
    m.command = command;
    m.config_json = to_json(config);
    m.started_utc = utc_timestamp();
    return m;
}

void finish_manifest(RunManifest& m, const fs::path& dir) {
    m.finished_utc = utc_timestamp();
    m.outputs.push_back("manifest.json");
    write_manifest(dir / "manifest.json", m);
}

}  // namespace

//---------------------------------------------------------------------------//

std::string format_double(double x) {
    if (!std::isfinite(x)) return non_finite(x);
    char buf[64];
    auto const res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string format_sig(double x, int digits) {
    if (!std::isfinite(x)) return non_finite(x);
    char buf[64];
    auto const res =
        std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, digits);
    return std::string(buf, res.ptr);
}

void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError("cannot create output directory '" + dir.string() + "'" +
                      (ec ? ": " + ec.message() : std::string()));
    }
}

void write_csv(const fs::path& file, const CsvTable& table) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + file.string() + "' for writing");
    auto write_row = [&](const CsvRow& row) {
        if (row.size() != table.header.size()) {
            throw InvalidArgument("write_csv: row width does not match header in " +
                                  file.filename().string());
        }
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out.put(',');
            out << row[i];
        }
        out.put('\n');
    };
    write_row(table.header);
    for (auto const& r : table.rows) write_row(r);
    out.flush();
    if (!out) throw IoError("write failed for '" + file.string() + "'");
}

//---------------------------------------------------------------------------//

std::string utc_timestamp() {
    std::time_t const now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string to_json(const RunManifest& m) {
    using json = nlohmann::ordered_json;
    json j;
    j["tool"] = "uimart";
    j["version"] = UIMART_VERSION_STRING;
    j["command"] = m.command;
    j["config"] = json::parse(m.config_json);
    j["seed_derivation"] = "stream_seed(master, namespace, index) = derive_seed(derive_seed(master, namespace), index)";
    json ns = json::array();
    for (auto n : m.seed_namespaces) {
        ns.push_back({{"name", to_string(n)}, {"tag", hex_tag(static_cast<std::uint64_t>(n))}});
    }
    j["seed_namespaces"] = ns;
    j["outputs"] = m.outputs;
    j["started_utc"] = m.started_utc;
    j["finished_utc"] = m.finished_utc;
    json stages = json::array();
    for (auto const& s : m.stages) stages.push_back({{"stage", s.name}, {"seconds", s.seconds}});
    j["stages"] = stages;
    return j.dump(2) + "\n";
}

void write_manifest(const fs::path& file, const RunManifest& manifest) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + file.string() + "' for writing");
    out << to_json(manifest);
    if (!out) throw IoError("write failed for '" + file.string() + "'");
}

//---------------------------------------------------------------------------//

CSequence resolve_c_sequence(const ExperimentConfig& config, unsigned workers) {
    if (config.c_mode == CSource::closed_form) return CSequence::for_model(config.model);
    RunSpec spec = base_spec(config, workers);
    spec.n_paths = config.pilot_paths;
    spec.path_stream = SeedNamespace::pilot;
    auto const records = run_paths(spec);
    std::vector<double> sups;
    sups.reserve(records.size());
    for (auto const& r : records) sups.push_back(r.raw.sup);
    return empirical_c_sequence(tail_table(sups, config.tail_levels));
}

AnalyticReference::AnalyticReference(const ExperimentConfig& config, const CSequence& seq)
    : model_(config.model), seq_(seq) {
    if (model_ == ModelTag::double_or_nothing) {
        enumeration_.emplace(config.max_depth);
        try {
            oracle_.emplace(config.max_depth, seq);
        } catch (const InsufficientData&) {
            // Left empty: construction laws are undefined for this sequence.
        }
    }
}

double AnalyticReference::raw_sup_tail(double level) const {
    if (enumeration_) return enumeration_->sup_tail(level);
    return exact_sup_tail(model_, level);
}

double AnalyticReference::stopped_sup_tail(std::uint64_t n) const {
    if (enumeration_) return oracle_ ? oracle_->stopped_sup_tail(static_cast<double>(n)) : kNaN;
    return guarded([&] { return stopped_tail_inverse_bessel(seq_, n); });
}

double AnalyticReference::terminal_mean_truncated(std::uint64_t y_max) const {
    if (enumeration_) {
        return oracle_ ? guarded([&] { return oracle_->terminal_mean_truncated(y_max); }) : kNaN;
    }
    return guarded([&] { return 1.0 - 1.0 / seq_.value(y_max); });
}

double AnalyticReference::stopped_ui_tail(double cap) const {
    if (enumeration_) return oracle_ ? oracle_->ui_tail(cap) : kNaN;
    // Terminal = Y on hit, and P(hit | Y = y) = 1/y: the tail mass is P(Y > K).
    return guarded([&] { return 1.0 / seq_.value(static_cast<std::uint64_t>(std::floor(cap))); });
}

double AnalyticReference::stopped_truncated_sup_mean(double cap) const {
    if (enumeration_) return oracle_ ? oracle_->truncated_sup_mean(cap) : kNaN;
    return guarded([&] { return truncated_sup_mean_inverse_bessel(seq_, cap); });
}

double AnalyticReference::raw_truncated_sup_mean(double cap) const {
    if (enumeration_) {
        NeumaierSum acc;
        for (auto const& a : enumeration_->atoms()) acc.add(a.probability * std::min(a.sup, cap));
        return acc.value();
    }
    return cap < 1.0 ? cap : 1.0 + std::log(cap);
}

double AnalyticReference::raw_ui_tail(double cap) const {
    if (enumeration_) {
        NeumaierSum acc;
        for (auto const& a : enumeration_->atoms()) {
            if (a.terminal > cap) acc.add(a.probability * a.terminal);
        }
        return acc.value();
    }
    return 0.0;
}

double AnalyticReference::raw_terminal_mean() const {
    return enumeration_ ? enumeration_->terminal_mean() : 0.0;
}

double AnalyticReference::checkpoint_mean(double t) const {
    return enumeration_ ? 1.0 : inverse_bessel3_mean(t);
}

//---------------------------------------------------------------------------//

namespace {

CsvRow estimate_row(const std::string& quantity, const std::string& threshold,
                    const Estimate& e, double analytic) {
    return {quantity,
            threshold,
            format_double(e.value),
            format_double(e.ci.low),
            format_double(e.ci.high),
            format_double(analytic)};
}

}  // namespace

DiagnosticTables build_diagnostic_tables(const Columns& cols, const ExperimentConfig& config,
                                         const CSequence& seq) {
    AnalyticReference const ref(config, seq);
    std::uint64_t const m = config.tail_levels;
    bool const gridded = config.model == ModelTag::inverse_bessel3;

    DiagnosticTables t;
    TailTable const stopped = tail_table(cols.stopped_sup, m);
    TailTable const raw = tail_table(cols.raw_sup, m);

    t.tails.header = {"level", "estimate", "ci_low", "ci_high", "analytic", "bias_budget"};
    t.series.header = {"m", "S_m", "bound"};
    t.series_empirical.header = {"m", "S_m", "bound"};
    NeumaierSum s_analytic;
    NeumaierSum s_empirical;
    for (std::uint64_t n = 1; n <= m; ++n) {
        std::size_t const i = n - 1;
        double const exact_raw = ref.raw_sup_tail(static_cast<double>(n));
        double const bias = gridded ? std::max(0.0, exact_raw - raw.estimates[i]) : 0.0;
        double const analytic = ref.stopped_sup_tail(n);
        t.tails.rows.push_back({std::to_string(n), format_double(stopped.estimates[i]),
                                format_double(stopped.ci_low[i]),
                                format_double(stopped.ci_high[i]), format_double(analytic),
                                format_double(bias)});

        double const bound = guarded([&] { return divergence_bound(seq, n); });
        s_analytic.add(analytic);
        s_empirical.add(stopped.estimates[i]);
        t.series.rows.push_back(
            {std::to_string(n), format_double(s_analytic.value()), format_double(bound)});
        t.series_empirical.rows.push_back(
            {std::to_string(n), format_double(s_empirical.value()), format_double(bound)});
    }

    t.ui.header = {"quantity", "threshold", "estimate", "ci_low", "ci_high", "analytic"};
    auto& ui = t.ui.rows;
    for (std::uint64_t y : config.y_max_list) {
        ui.push_back(estimate_row("terminal_mean_truncated", std::to_string(y),
                                  terminal_mean_truncated(cols.stopped_terminal, cols.y_exact, y),
                                  ref.terminal_mean_truncated(y)));
    }
    for (double k : config.k_list) {
        ui.push_back(estimate_row("ui_tail", format_double(k), ui_tail(cols.stopped_terminal, k),
                                  ref.stopped_ui_tail(k)));
    }
    for (double k : config.k_list) {
        ui.push_back(estimate_row("truncated_sup_mean", format_double(k),
                                  truncated_sup_mean(cols.stopped_sup, k),
                                  ref.stopped_truncated_sup_mean(k)));
    }
    for (double k : config.k_list) {
        ui.push_back(estimate_row("h1_norm_truncated", format_double(k),
                                  h1_norm_truncated(cols.stopped_qv, k), kNaN));
    }
    for (double k : config.k_list) {
        ui.push_back(estimate_row("raw_truncated_sup_mean", format_double(k),
                                  truncated_sup_mean(cols.raw_sup, k),
                                  ref.raw_truncated_sup_mean(k)));
    }
    for (double k : config.k_list) {
        ui.push_back(estimate_row("raw_h1_norm_truncated", format_double(k),
                                  h1_norm_truncated(cols.raw_qv, k), kNaN));
    }
    for (double k : config.k_list) {
        ui.push_back(estimate_row("raw_ui_tail", format_double(k), ui_tail(cols.raw_terminal, k),
                                  ref.raw_ui_tail(k)));
    }
    for (double k : config.k_list) {
        ui.push_back(estimate_row("control_h1_norm_truncated", format_double(k),
                                  h1_norm_truncated(cols.control_qv, k), kNaN));
    }
    ui.push_back(estimate_row("raw_terminal_mean", "", mean_estimate(cols.raw_terminal),
                              ref.raw_terminal_mean()));
    ui.push_back(estimate_row("checkpoint_mean", format_double(config.checkpoint_time),
                              mean_estimate(cols.checkpoint),
                              ref.checkpoint_mean(config.checkpoint_time)));
    return t;
}

std::vector<std::string> write_diagnostic_tables(const fs::path& dir,
                                                 const DiagnosticTables& tables) {
    write_csv(dir / "tails.csv", tables.tails);
    write_csv(dir / "series.csv", tables.series);
    write_csv(dir / "series_empirical.csv", tables.series_empirical);
    write_csv(dir / "ui.csv", tables.ui);
    return {"tails.csv", "series.csv", "series_empirical.csv", "ui.csv"};
}

CsvTable raw_summary_table(const std::vector<PathRecord>& records) {
    CsvTable t;
    t.header = {"path_id", "seed", "sup", "terminal", "qv", "absorbed"};
    t.rows.reserve(records.size());
    for (auto const& r : records) {
        t.rows.push_back({std::to_string(r.index), std::to_string(r.raw.seed),
                          format_double(r.raw.sup), format_double(r.raw.terminal),
                          format_double(r.raw.qv), r.raw.absorbed ? "true" : "false"});
    }
    return t;
}

CsvTable stopped_table(const std::vector<PathRecord>& records) {
    CsvTable t;
    t.header = {"path_id", "y_exact", "y_log2", "hit", "sigma_index",
                "stopped_sup", "stopped_terminal", "stopped_qv"};
    t.rows.reserve(records.size());
    for (auto const& r : records) {
        if (!r.threshold) throw InvalidArgument("stopped_table: record without a threshold");
        auto const& y = *r.threshold;
        auto const& s = r.stopped;
        t.rows.push_back({std::to_string(r.index),
                          y.is_exact() ? std::to_string(*y.exact_value()) : std::string(),
                          y.is_exact() ? std::string() : format_double(y.log2_value()),
                          s.hit ? "true" : "false",
                          s.sigma_index ? std::to_string(*s.sigma_index) : std::string(),
                          format_double(s.sup), format_double(s.terminal), format_double(s.qv)});
    }
    return t;
}

//---------------------------------------------------------------------------//

RunManifest cmd_simulate(const ExperimentConfig& config, std::ostream& log) {
    RunManifest m = start_manifest("simulate", config);
    m.seed_namespaces = {SeedNamespace::path};
    fs::path const dir = config.output_dir;
    ensure_directory(dir);
    unsigned const workers = effective_workers(config);
    RunSpec const spec = base_spec(config, workers);

    if (config.dump_paths) {
        Ensemble const ens = m.time_stage("simulate", [&] {
            return generate_ensemble(spec.model, config.n_paths, config.master_seed, workers);
        });
        CsvTable summary;
        CsvTable dump;
        dump.header = {"path_id", "step", "time", "value"};
        std::vector<PathRecord> records(ens.paths.size());
        for (std::size_t i = 0; i < ens.paths.size(); ++i) {
            auto const& p = ens.paths[i];
            records[i].index = i;
            records[i].raw = summarize(p);
            for (std::size_t k = 0; k < p.values.size(); ++k) {
                double const t = p.times.empty() ? static_cast<double>(k) : p.times[k];
                dump.rows.push_back({std::to_string(i), std::to_string(k), format_double(t),
                                     format_double(p.values[k])});
            }
        }
        m.time_stage("write", [&] {
            write_csv(dir / "raw_paths.csv", raw_summary_table(records));
            write_csv(dir / "paths.csv", dump);
        });
        m.outputs = {"raw_paths.csv", "paths.csv"};
    } else {
        auto const records = m.time_stage("simulate", [&] { return run_paths(spec); });
        m.time_stage("write", [&] { write_csv(dir / "raw_paths.csv", raw_summary_table(records)); });
        m.outputs = {"raw_paths.csv"};
    }
    finish_manifest(m, dir);
    log << "simulate: " << config.n_paths << " " << to_string(config.model) << " paths -> "
        << dir.string() << "\n";
    return m;
}

RunManifest cmd_construct(const ExperimentConfig& config, std::ostream& log) {
    RunManifest m = start_manifest("construct", config);
    m.seed_namespaces = {SeedNamespace::path, SeedNamespace::threshold};
    if (config.c_mode == CSource::empirical) m.seed_namespaces.push_back(SeedNamespace::pilot);
    fs::path const dir = config.output_dir;
    ensure_directory(dir);
    unsigned const workers = effective_workers(config);

    CSequence const seq =
        m.time_stage("c_sequence", [&] { return resolve_c_sequence(config, workers); });
    RunSpec spec = base_spec(config, workers);
    spec.c_sequence = seq;
    auto const records = m.time_stage("construct", [&] { return run_paths(spec); });
    m.time_stage("write", [&] { write_csv(dir / "stopped_paths.csv", stopped_table(records)); });
    m.outputs = {"stopped_paths.csv"};
    finish_manifest(m, dir);
    log << "construct: " << config.n_paths << " stopped " << to_string(config.model)
        << " paths -> " << dir.string() << "\n";
    return m;
}

RunManifest cmd_diagnose(const ExperimentConfig& config, std::ostream& log) {
    RunManifest m = start_manifest("diagnose", config);
    m.seed_namespaces = {SeedNamespace::path, SeedNamespace::threshold};
    if (config.c_mode == CSource::empirical) m.seed_namespaces.push_back(SeedNamespace::pilot);
    fs::path const dir = config.output_dir;
    ensure_directory(dir);
    unsigned const workers = effective_workers(config);

    CSequence const seq =
        m.time_stage("c_sequence", [&] { return resolve_c_sequence(config, workers); });
    RunSpec spec = base_spec(config, workers);
    spec.c_sequence = seq;
    spec.control_level = config.control_level;
    spec.checkpoint_time = config.checkpoint_time;
    auto const records = m.time_stage("simulate", [&] { return run_paths(spec); });
    auto const tables = m.time_stage("diagnostics", [&] {
        return build_diagnostic_tables(columns(records), config, seq);
    });
    m.outputs = m.time_stage("write", [&] { return write_diagnostic_tables(dir, tables); });
    finish_manifest(m, dir);
    log << "diagnose: " << config.n_paths << " " << to_string(config.model) << " paths -> "
        << dir.string() << "\n";
    return m;
}

//---------------------------------------------------------------------------//

namespace {

double parse_real(const std::string& s, const char* what) {
    double x = 0.0;
    auto const res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw UsageError(std::string(what) + ": expected a number, got '" + s + "'");
    }
    return x;
}

std::uint64_t parse_index(const std::string& s, const char* what) {
    std::uint64_t x = 0;
    auto const res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw UsageError(std::string(what) + ": expected a non-negative integer, got '" + s + "'");
    }
    return x;
}

}  // namespace

void cmd_oracle(const std::string& model_name, const std::string& query,
                const std::vector<std::string>& args, std::ostream& out) {
    ModelTag model{};
    try {
        model = parse_model_tag(model_name);
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
    if (args.size() != 1) {
        throw UsageError("oracle " + query + ": expected exactly one argument");
    }
    std::string const& arg = args.front();
    CSequence const seq = CSequence::for_model(model);

    if (query == "sup_tail") {
        double const a = parse_real(arg, "sup_tail");
        if (!(a >= 0.0)) throw UsageError("sup_tail: level must be >= 0");
        out << format_sig(exact_sup_tail(model, a)) << "\n";
    } else if (query == "c") {
        out << format_sig(seq.value(parse_index(arg, "c"))) << "\n";
    } else if (query == "y_pmf") {
        std::uint64_t const n = parse_index(arg, "y_pmf");
        if (n < 1) throw UsageError("y_pmf: n must be >= 1");
        out << format_sig(seq.y_pmf(n)) << "\n";
    } else if (query == "stopped_tail") {
        std::uint64_t const n = parse_index(arg, "stopped_tail");
        if (n < 1) throw UsageError("stopped_tail: n must be >= 1");
        double const v = model == ModelTag::inverse_bessel3
                             ? stopped_tail_inverse_bessel(seq, n)
                             : DonConstructionOracle(kMaxDonDepth, seq)
                                   .stopped_sup_tail(static_cast<double>(n));
        out << format_sig(v) << "\n";
    } else if (query == "divergence_bound") {
        std::uint64_t const m = parse_index(arg, "divergence_bound");
        if (m < 1) throw UsageError("divergence_bound: m must be >= 1");
        out << format_sig(divergence_bound(seq, m)) << "\n";
    } else if (query == "enumeration" || query == "don_enumeration") {
        if (model != ModelTag::double_or_nothing) {
            throw UsageError("enumeration is only defined for double-or-nothing");
        }
        std::uint64_t const depth = parse_index(arg, "enumeration");
        if (depth < 1 || depth > static_cast<std::uint64_t>(kMaxDonDepth)) {
            throw UsageError("enumeration: depth must lie in [1, 64]");
        }
        DonEnumeration const e(static_cast<int>(depth));
        out << "doublings,survived,probability,sup,terminal\n";
        for (auto const& a : e.atoms()) {
            out << a.doublings << ',' << (a.survived ? "true" : "false") << ','
                << format_sig(a.probability) << ',' << format_sig(a.sup) << ','
                << format_sig(a.terminal) << "\n";
        }
    } else {
        throw UsageError("unknown oracle query '" + query +
                         "' (expected sup_tail, c, y_pmf, stopped_tail, divergence_bound or "
                         "enumeration)");
    }
}

}  // namespace uimart
