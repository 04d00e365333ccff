#include "uimart/construction.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>

#include "uimart/errors.hpp"
#include "uimart/numeric.hpp"
#include "uimart/parallel.hpp"
#include "uimart/rng.hpp"

namespace uimart {

namespace {

const std::vector<double>& harmonic_table() {
    static const std::vector<double> table = [] {
        std::vector<double> h(kThresholdCap + 1, 0.0);
        NeumaierSum acc;
        for (std::uint64_t n = 1; n <= kThresholdCap; ++n) {
            acc.add(1.0 / static_cast<double>(n));
            h[n] = acc.value();
        }
        return h;
    }();
    return table;
}

// Sum_{k<=n} 2^-(floor(log2 k)+1): each complete octave contributes 1/2.
double don_tail_sum(std::uint64_t n) {
    if (n == 0) return 0.0;
    int const octave = std::bit_width(n) - 1;
    double const start = std::ldexp(1.0, octave);
    double const partial = (static_cast<double>(n) - start + 1.0) * std::ldexp(1.0, -(octave + 1));
    return 0.5 * octave + partial;
}

}  // namespace

const char* to_string(CMode mode) noexcept {
    switch (mode) {
        case CMode::closed_form_inverse_bessel: return "closed-form-inverse-bessel";
        case CMode::closed_form_don: return "closed-form-don";
        case CMode::empirical: return "empirical";
    }
    return "unknown";
}

double harmonic_number(std::uint64_t n) {
    if (n <= kThresholdCap) return harmonic_table()[n];
    double const x = static_cast<double>(n);
    double const inv2 = 1.0 / (x * x);
    return std::log(x) + kEulerGamma + 0.5 / x - inv2 / 12.0 + inv2 * inv2 / 120.0;
}

CSequence CSequence::inverse_bessel() {
    CSequence s;
    s.mode_ = CMode::closed_form_inverse_bessel;
    return s;
}

CSequence CSequence::double_or_nothing() {
    CSequence s;
    s.mode_ = CMode::closed_form_don;
    return s;
}

CSequence CSequence::empirical(std::vector<double> tails) {
    auto prefix = std::make_shared<std::vector<double>>(tails.size() + 1, 0.0);
    NeumaierSum acc;
    for (std::size_t k = 0; k < tails.size(); ++k) {
        double const p = tails[k];
        if (!(p >= 0.0 && p <= 1.0)) {
            throw InvalidArgument("CSequence::empirical: tail estimates must lie in [0, 1]");
        }
        acc.add(p);
        (*prefix)[k + 1] = acc.value();
    }
    CSequence s;
    s.mode_ = CMode::empirical;
    s.prefix_ = std::move(prefix);
    return s;
}

CSequence CSequence::for_model(ModelTag model) {
    return model == ModelTag::inverse_bessel3 ? inverse_bessel() : double_or_nothing();
}

std::optional<std::uint64_t> CSequence::coverage() const {
    if (mode_ != CMode::empirical) return std::nullopt;
    return prefix_->size() - 1;
}

double CSequence::tail_sum(std::uint64_t n) const {
    switch (mode_) {
        case CMode::closed_form_inverse_bessel: return harmonic_number(n);
        case CMode::closed_form_don: return don_tail_sum(n);
        case CMode::empirical:
            if (n >= prefix_->size()) {
                throw InsufficientData("empirical c-sequence covers levels 1.." +
                                       std::to_string(prefix_->size() - 1) +
                                       ", requested " + std::to_string(n));
            }
            return (*prefix_)[n];
    }
    return 0.0;
}

double CSequence::value(std::uint64_t n) const {
    if (n == 0) return c0_;
    return std::log(std::numbers::e + tail_sum(n));
}

double CSequence::y_pmf(std::uint64_t n) const {
    if (n == 0) return 0.0;
    return 1.0 / value(n - 1) - 1.0 / value(n);
}

CSequence CSequence::with_faulty_c0(double c0) const {
    CSequence s = *this;
    s.c0_ = c0;
    return s;
}

double c_value(const CSequence& seq, std::uint64_t n) { return seq.value(n); }

//---------------------------------------------------------------------------//

ThresholdSample ThresholdSample::exact(std::uint64_t y, std::uint64_t cap) {
    if (y < 1) throw InvalidArgument("ThresholdSample: Y must be >= 1");
    if (y > cap) throw InvalidArgument("ThresholdSample: exact Y above cap");
    return {y, std::log2(static_cast<double>(y)), cap};
}

ThresholdSample ThresholdSample::log_magnitude(double log2_y, std::uint64_t cap) {
    if (!(log2_y > std::log2(static_cast<double>(cap)))) {
        throw InvalidArgument("ThresholdSample: log-magnitude only above the cap");
    }
    return {std::nullopt, log2_y, cap};
}

double ThresholdSample::value() const noexcept {
    if (exact_) return static_cast<double>(*exact_);
    return std::exp2(log2_);
}

namespace {

// log2 of the smallest n with tail_sum(n) >= target, for targets past the cap.
double log2_index_for_tail_sum(CMode mode, double target) {
    if (std::isinf(target)) return std::numeric_limits<double>::infinity();
    if (mode == CMode::closed_form_inverse_bessel) {
        // H_n = ln n + gamma + O(1/n), n > 10^6.
        return (target - kEulerGamma) / std::numbers::ln2;
    }
    // Double-or-nothing: find the octave J with J/2 < target <= (J+1)/2, then
    // the offset inside it.
    double const octave = std::ceil(2.0 * target) - 1.0;
    double const within = (target - 0.5 * octave) * 2.0;  // fraction of the octave, (0, 1]
    return octave + std::log2(1.0 + within);
}

}  // namespace

ThresholdSample y_quantile(const CSequence& seq, double u, std::uint64_t cap) {
    if (!(u > 0.0 && u < 1.0)) throw InvalidArgument("y_quantile: u must lie in (0, 1)");
    double const inv_c0 = 1.0 / seq.value(0);
    auto cdf = [&](std::uint64_t n) { return inv_c0 - 1.0 / seq.value(n); };

    std::uint64_t hi = cap;
    if (auto const m = seq.coverage()) hi = std::min(hi, *m);
    if (hi >= 1 && cdf(hi) >= u) {
        std::uint64_t lo = 1;
        while (lo < hi) {
            std::uint64_t const mid = lo + (hi - lo) / 2;
            if (cdf(mid) >= u) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        return ThresholdSample::exact(lo, cap);
    }
    if (seq.mode() == CMode::empirical) {
        throw InsufficientData(
            "y_quantile: empirical c-sequence is bounded over its coverage; the law of Y "
            "is not determined at u = " + std::to_string(u));
    }
    // 1/c_n <= 1/c_0 - u  <=>  tail_sum(n) >= exp(1 / (1/c_0 - u)) - e.
    double const gap = inv_c0 - u;
    double const target = gap > 0.0 ? std::exp(1.0 / gap) - std::numbers::e
                                     : std::numeric_limits<double>::infinity();
    double l2 = log2_index_for_tail_sum(seq.mode(), target);
    l2 = std::max(l2, std::nextafter(std::log2(static_cast<double>(cap)),
                                     std::numeric_limits<double>::infinity()));
    return ThresholdSample::log_magnitude(l2, cap);
}

ThresholdSample sample_Y(const CSequence& seq, std::uint64_t seed, std::uint64_t cap) {
    Rng rng(seed);
    return y_quantile(seq, rng.uniform_open(), cap);
}

//---------------------------------------------------------------------------//

StoppingRecord first_exceedance(std::span<const double> values,
                                const ThresholdSample& threshold) {
    if (values.empty()) throw InvalidArgument("first_exceedance: empty path");
    StoppingRecord rec;
    rec.threshold = threshold;
    double const y = threshold.value();
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (values[k] > y) {
            rec.sigma_index = k;
            rec.hit = true;
            rec.overshoot = values[k] - y;
            break;
        }
    }
    return rec;
}

StoppingRecord first_exceedance(const SamplePath& path, const ThresholdSample& threshold) {
    return first_exceedance(std::span<const double>(path.values), threshold);
}

double stopped_level(PathKind kind, std::span<const double> values,
                     const StoppingRecord& record) {
    if (!record.sigma_index) throw InvalidArgument("stopped_level: record was not hit");
    return kind == PathKind::continuous_grid ? record.threshold.value()
                                             : values[*record.sigma_index];
}

SamplePath stop_path(const SamplePath& path, const StoppingRecord& record) {
    if (path.empty()) throw InvalidArgument("stop_path: empty path");
    double const y = record.threshold.value();
    if (!record.hit) {
        if (record.sigma_index || path_sup(path) > y) {
            throw InvalidArgument("stop_path: record does not belong to this path");
        }
        return path;
    }
    if (!record.sigma_index || *record.sigma_index >= path.size()) {
        throw InvalidArgument("stop_path: sigma index out of range");
    }
    std::size_t const sigma = *record.sigma_index;
    // values[sigma] == y is allowed so that re-stopping a stopped continuous
    // path reproduces it.
    if (path.values[sigma] < y) {
        throw InvalidArgument("stop_path: record does not belong to this path");
    }
    for (std::size_t k = 0; k < sigma; ++k) {
        if (path.values[k] > y) {
            throw InvalidArgument("stop_path: record does not belong to this path");
        }
    }
    SamplePath out = path;
    double const level = stopped_level(path.kind, path.values, record);
    std::fill(out.values.begin() + static_cast<std::ptrdiff_t>(sigma), out.values.end(), level);
    out.absorbed_at = sigma;
    out.truncated = false;
    return out;
}

StoppedEnsemble build_stopped_ensemble(const ModelParams& model, std::size_t n_paths,
                                       std::uint64_t master_seed, const CSequence& seq,
                                       unsigned workers) {
    StoppedEnsemble ens;
    ens.master_seed = master_seed;
    ens.model_tag = describe(model);
    ens.entries.resize(n_paths);
    parallel_for_index(n_paths, workers, [&](std::size_t i) {
        SamplePath raw = simulate(stream_seed(master_seed, SeedNamespace::path, i), model);
        ThresholdSample const y =
            sample_Y(seq, stream_seed(master_seed, SeedNamespace::threshold, i));
        StoppingRecord rec = first_exceedance(raw, y);
        ens.entries[i] = {stop_path(raw, rec), rec};
    });
    return ens;
}

//---------------------------------------------------------------------------//

DonConstructionOracle::DonConstructionOracle(int max_depth, CSequence seq)
    : enumeration_(max_depth), seq_(std::move(seq)) {
    auto add_group = [this](double weight, const std::vector<DonAtom>& law) {
        for (auto const& a : law) {
            atoms_.push_back({a.sup, a.terminal, weight * a.probability});
        }
    };
    for (int j = 1; j <= max_depth; ++j) {
        std::uint64_t const lo = std::uint64_t{1} << (j - 1);
        std::uint64_t const hi = lo + (lo - 1);  // 2^j - 1 without overflow at j = 64
        double const weight = 1.0 / seq_.value(lo - 1) - 1.0 / seq_.value(hi);
        add_group(weight, enumeration_.stopped_law(lo));
    }
    // Y >= 2^depth: never stopped before the depth limit.
    std::uint64_t const top = max_depth == 64 ? ~std::uint64_t{0}
                                              : (std::uint64_t{1} << max_depth) - 1;
    add_group(1.0 / seq_.value(top), enumeration_.atoms());
}

double DonConstructionOracle::stopped_sup_tail(double n) const {
    NeumaierSum acc;
    for (auto const& a : atoms_) {
        if (a.sup > n) acc.add(a.probability);
    }
    return acc.value();
}

double DonConstructionOracle::terminal_mean_truncated(std::uint64_t y_max) const {
    NeumaierSum acc;
    for (std::uint64_t y = 1; y <= y_max; ++y) {
        acc.add(seq_.y_pmf(y) * enumeration_.stopped_terminal_mean(y));
    }
    return acc.value();
}

double DonConstructionOracle::ui_tail(double cap) const {
    NeumaierSum acc;
    for (auto const& a : atoms_) {
        if (a.terminal > cap) acc.add(a.probability * a.terminal);
    }
    return acc.value();
}

double DonConstructionOracle::truncated_sup_mean(double cap) const {
    NeumaierSum acc;
    for (auto const& a : atoms_) acc.add(a.probability * std::min(a.sup, cap));
    return acc.value();
}

}  // namespace uimart
