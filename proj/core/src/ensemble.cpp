#include "uimart/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "uimart/errors.hpp"
#include "uimart/numeric.hpp"
#include "uimart/parallel.hpp"

namespace uimart {

StoppedSummary summarize_stopped(const SamplePath& raw, const StoppingRecord& record) {
    StoppedSummary s;
    s.hit = record.hit;
    s.sigma_index = record.sigma_index;
    s.overshoot = record.overshoot;
    if (!record.hit) {
        s.sup = path_sup(raw);
        s.terminal = path_terminal(raw);
        s.qv = realized_qv(raw);
        return s;
    }
    // Same functionals as summarize(stop_path(raw, record)) without the copy.
    std::size_t const sigma = *record.sigma_index;
    double const level = stopped_level(raw.kind, raw.values, record);
    std::span<const double> const head(raw.values.data(), sigma);
    s.sup = sigma == 0 ? level : std::max(path_sup(head), level);
    s.terminal = level;
    NeumaierSum qv;
    for (std::size_t k = 1; k < sigma; ++k) {
        double const d = raw.values[k] - raw.values[k - 1];
        qv.add(d * d);
    }
    if (sigma > 0) {
        double const d = level - raw.values[sigma - 1];
        qv.add(d * d);
    }
    s.qv = qv.value();
    return s;
}

std::vector<PathRecord> run_paths(const RunSpec& spec) {
    if (spec.n_paths == 0) throw InvalidArgument("run_paths: n_paths must be positive");
    std::visit([](const auto& p) { validate(p); }, spec.model);
    std::optional<ThresholdSample> control;
    if (spec.control_level) control = ThresholdSample::exact(*spec.control_level);

    std::vector<PathRecord> out(spec.n_paths);
    parallel_for_index(spec.n_paths, spec.workers, [&](std::size_t i) {
        SamplePath const path =
            simulate(stream_seed(spec.master_seed, spec.path_stream, i), spec.model);
        PathRecord& rec = out[i];
        rec.index = i;
        rec.raw = summarize(path);
        if (spec.checkpoint_time) rec.checkpoint_value = value_at_time(path, *spec.checkpoint_time);
        if (spec.c_sequence) {
            ThresholdSample const y = sample_Y(
                *spec.c_sequence, stream_seed(spec.master_seed, SeedNamespace::threshold, i));
            rec.threshold = y;
            rec.stopped = summarize_stopped(path, first_exceedance(path, y));
        }
        if (control) rec.control = summarize_stopped(path, first_exceedance(path, *control));
    });
    return out;
}

Columns columns(const std::vector<PathRecord>& records) {
    Columns c;
    auto const n = records.size();
    for (auto* v : {&c.raw_sup, &c.raw_terminal, &c.raw_qv, &c.checkpoint, &c.stopped_sup,
                    &c.stopped_terminal, &c.stopped_qv, &c.control_sup, &c.control_terminal,
                    &c.control_qv}) {
        v->reserve(n);
    }
    c.y_exact.reserve(n);
    for (auto const& r : records) {
        c.raw_sup.push_back(r.raw.sup);
        c.raw_terminal.push_back(r.raw.terminal);
        c.raw_qv.push_back(r.raw.qv);
        c.checkpoint.push_back(r.checkpoint_value);
        c.stopped_sup.push_back(r.stopped.sup);
        c.stopped_terminal.push_back(r.stopped.terminal);
        c.stopped_qv.push_back(r.stopped.qv);
        c.control_sup.push_back(r.control.sup);
        c.control_terminal.push_back(r.control.terminal);
        c.control_qv.push_back(r.control.qv);
        c.y_exact.push_back(r.threshold && r.threshold->is_exact() ? *r.threshold->exact_value()
                                                                   : 0);
    }
    return c;
}

}  // namespace uimart
