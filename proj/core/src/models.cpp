#include "uimart/models.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "uimart/errors.hpp"
#include "uimart/parallel.hpp"
#include "uimart/rng.hpp"

namespace uimart {

const char* to_string(ModelTag tag) noexcept {
    switch (tag) {
        case ModelTag::inverse_bessel3: return "inverse-bessel";
        case ModelTag::double_or_nothing: return "double-or-nothing";
    }
    return "unknown";
}

ModelTag parse_model_tag(std::string_view name) {
    if (name == "inverse-bessel" || name == "inverse-bessel3") {
        return ModelTag::inverse_bessel3;
    }
    if (name == "double-or-nothing" || name == "don") {
        return ModelTag::double_or_nothing;
    }
    throw InvalidArgument("unknown model tag '" + std::string(name) + "'");
}

//---------------------------------------------------------------------------//
// Inverse Bessel(3)
//---------------------------------------------------------------------------//

void validate(const InverseBessel3Params& params) {
    auto const& d = params.start_direction;
    double const norm = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
    if (std::abs(norm - 1.0) > 1e-12) {
        throw InvalidArgument("start_direction must be a unit vector");
    }
    if (!(params.absorb_eps > 0.0 && params.absorb_eps < 1.0)) {
        throw InvalidArgument("absorb_eps must lie in (0, 1)");
    }
    if (!(params.far_step > 0.0) || !std::isfinite(params.far_step)) {
        throw InvalidArgument("far_step must be positive");
    }
    if (params.start_refinement < 0 || params.start_refinement > 60) {
        throw InvalidArgument("start_refinement must lie in [0, 60]");
    }
    double prev = 0.0;
    for (double cp : params.checkpoints) {
        if (!(cp > prev) || !std::isfinite(cp)) {
            throw InvalidArgument("checkpoints must be positive and increasing");
        }
        prev = cp;
    }
}

SamplePath simulate_inverse_bessel3(std::uint64_t seed,
                                    const InverseBessel3Params& params) {
    validate(params);
    Rng rng(seed);

    SamplePath path;
    path.kind = PathKind::continuous_grid;
    path.seed_id = seed;

    std::array<double, 3> x = params.start_direction;
    double r = 1.0;
    double t = 0.0;
    double const step = params.grid.step();
    auto checkpoint = params.checkpoints.begin();

    path.values.push_back(1.0);
    path.times.push_back(0.0);

    std::size_t const n_steps = params.grid.n_steps();
    auto const refine = static_cast<std::size_t>(params.start_refinement);
    for (std::size_t k = 1; k <= n_steps; ++k) {
        double const r2 = r * r;
        double h = r2 * std::min(params.far_step, step * std::max(1.0, r2));
        if (k <= refine) h = std::ldexp(h, -static_cast<int>(refine + 1 - k));
        bool landing = false;
        if (checkpoint != params.checkpoints.end() && t + h >= *checkpoint) {
            h = *checkpoint - t;
            landing = true;
        }
        double const s = std::sqrt(h);
        x[0] += s * rng.normal();
        x[1] += s * rng.normal();
        x[2] += s * rng.normal();
        r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
        if (landing) {
            t = *checkpoint;
            ++checkpoint;
        } else {
            t += h;
        }
        double const m = 1.0 / r;
        path.values.push_back(m);
        path.times.push_back(t);
        if (m <= params.absorb_eps) {
            path.absorbed_at = k;
            break;
        }
    }
    return path;
}

double value_at_time(const SamplePath& path, double t) {
    if (path.empty()) throw InvalidArgument("value_at_time: empty path");
    if (t < 0.0) throw InvalidArgument("value_at_time: negative time");
    if (path.times.empty()) {
        auto const k = static_cast<std::size_t>(std::floor(t));
        if (k >= path.size()) {
            if (path.absorbed_at) return path.values.back();
            throw InvalidArgument("value_at_time: path ends before t");
        }
        return path.values[k];
    }
    if (t > path.times.back()) {
        if (path.absorbed_at) return path.values.back();
        throw InvalidArgument("value_at_time: path ends before t");
    }
    auto const it = std::upper_bound(path.times.begin(), path.times.end(), t);
    return path.values[static_cast<std::size_t>(it - path.times.begin()) - 1];
}

double inverse_bessel3_mean(double t) {
    if (!(t >= 0.0)) throw InvalidArgument("inverse_bessel3_mean: negative time");
    if (t == 0.0) return 1.0;
    return std::erfc(-1.0 / std::sqrt(2.0 * t)) - 1.0;
}

//---------------------------------------------------------------------------//
// Double-or-nothing
//---------------------------------------------------------------------------//

void validate(const DoubleOrNothingParams& params) {
    if (params.max_depth < 1) throw InvalidArgument("max_depth must be >= 1");
    if (params.max_depth > kMaxDonDepth) {
        throw ResourceLimit("max_depth above " + std::to_string(kMaxDonDepth));
    }
}

SamplePath simulate_double_or_nothing(std::uint64_t seed,
                                      const DoubleOrNothingParams& params) {
    validate(params);
    Rng rng(seed);
    std::uint64_t const coins = rng.bits();

    SamplePath path;
    path.kind = PathKind::discrete_step;
    path.seed_id = seed;
    auto const depth = static_cast<std::size_t>(params.max_depth);
    path.values.reserve(depth + 1);
    path.values.push_back(1.0);

    double m = 1.0;
    for (std::size_t j = 1; j <= depth; ++j) {
        if (m > 0.0) {
            bool const heads = (coins >> (j - 1)) & 1U;
            m = heads ? 2.0 * m : 0.0;
            if (m == 0.0) path.absorbed_at = j;
        }
        path.values.push_back(m);
    }
    path.truncated = !path.absorbed_at.has_value();
    return path;
}

//---------------------------------------------------------------------------//

ModelTag tag_of(const ModelParams& params) noexcept {
    return std::holds_alternative<InverseBessel3Params>(params)
               ? ModelTag::inverse_bessel3
               : ModelTag::double_or_nothing;
}

std::string describe(const ModelParams& params) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os.precision(17);
    if (auto const* ib = std::get_if<InverseBessel3Params>(&params)) {
        os << "inverse-bessel(step=" << ib->grid.step()
           << ",horizon=" << ib->grid.horizon() << ",far_step=" << ib->far_step
           << ",start_refinement=" << ib->start_refinement
           << ",absorb_eps=" << ib->absorb_eps << ")";
    } else {
        os << "double-or-nothing(max_depth="
           << std::get<DoubleOrNothingParams>(params).max_depth << ")";
    }
    return os.str();
}

SamplePath simulate(std::uint64_t seed, const ModelParams& params) {
    return std::visit(
        [seed](const auto& p) -> SamplePath {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, InverseBessel3Params>) {
                return simulate_inverse_bessel3(seed, p);
            } else {
                return simulate_double_or_nothing(seed, p);
            }
        },
        params);
}

Ensemble generate_ensemble(const ModelParams& params, std::size_t n_paths,
                           std::uint64_t master_seed, unsigned workers) {
    Ensemble ens;
    ens.master_seed = master_seed;
    ens.model_tag = describe(params);
    ens.paths.resize(n_paths);
    parallel_for_index(n_paths, workers, [&](std::size_t i) {
        ens.paths[i] = simulate(stream_seed(master_seed, SeedNamespace::path, i), params);
    });
    return ens;
}

//---------------------------------------------------------------------------//
// Exact laws
//---------------------------------------------------------------------------//

double exact_sup_tail(ModelTag model, double a) {
    if (!(a >= 0.0)) throw InvalidArgument("exact_sup_tail: level must be >= 0");
    switch (model) {
        case ModelTag::inverse_bessel3:
            return a <= 1.0 ? 1.0 : 1.0 / a;
        case ModelTag::double_or_nothing:
            if (a < 1.0) return 1.0;
            if (std::isinf(a)) return 0.0;
            return std::ldexp(1.0, -(std::ilogb(a) + 1));
    }
    throw InvalidArgument("exact_sup_tail: unknown model");
}

DonEnumeration::DonEnumeration(int max_depth) : max_depth_(max_depth) {
    if (max_depth < 1) throw InvalidArgument("enumerate_don: max_depth must be >= 1");
    if (max_depth > kMaxDonDepth) {
        throw ResourceLimit("enumerate_don: max_depth above " + std::to_string(kMaxDonDepth));
    }
    atoms_.reserve(static_cast<std::size_t>(max_depth) + 1);
    for (int j = 0; j < max_depth; ++j) {
        atoms_.push_back({j, false, std::ldexp(1.0, -(j + 1)), std::ldexp(1.0, j), 0.0});
    }
    double const top = std::ldexp(1.0, max_depth);
    atoms_.push_back({max_depth, true, std::ldexp(1.0, -max_depth), top, top});
}

DonEnumeration enumerate_don(int max_depth) { return DonEnumeration(max_depth); }

double DonEnumeration::total_probability() const {
    double p = 0.0;
    for (auto const& a : atoms_) p += a.probability;
    return p;
}

double DonEnumeration::sup_tail(double a) const {
    double p = 0.0;
    for (auto const& atom : atoms_) {
        if (atom.sup > a) p += atom.probability;
    }
    return p;
}

double DonEnumeration::terminal_mean() const {
    double m = 0.0;
    for (auto const& a : atoms_) m += a.probability * a.terminal;
    return m;
}

std::vector<DonAtom> DonEnumeration::stopped_law(std::uint64_t threshold) const {
    if (threshold < 1) throw InvalidArgument("stopped_law: threshold must be >= 1");
    // First value 2^j strictly above the threshold.
    int const stop_level = std::bit_width(threshold);
    if (stop_level > max_depth_) return atoms_;
    std::vector<DonAtom> out(atoms_.begin(), atoms_.begin() + stop_level);
    double const v = std::ldexp(1.0, stop_level);
    out.push_back({stop_level, true, std::ldexp(1.0, -stop_level), v, v});
    return out;
}

double DonEnumeration::stopped_terminal_mean(std::uint64_t threshold) const {
    double m = 0.0;
    for (auto const& a : stopped_law(threshold)) m += a.probability * a.terminal;
    return m;
}

double DonEnumeration::stopped_sup_tail(std::uint64_t threshold, double a) const {
    double p = 0.0;
    for (auto const& atom : stopped_law(threshold)) {
        if (atom.sup > a) p += atom.probability;
    }
    return p;
}

}  // namespace uimart
