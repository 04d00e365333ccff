#include "uimart/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "uimart/errors.hpp"
#include "uimart/parallel.hpp"

namespace uimart {

using json = nlohmann::ordered_json;

namespace {

template <class T>
bool strictly_increasing(const std::vector<T>& xs) {
    return std::adjacent_find(xs.begin(), xs.end(),
                              [](const T& a, const T& b) { return !(a < b); }) == xs.end();
}

void require_positive(double x, const char* field) {
    if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError(field, "must be a positive number");
}

const char* c_mode_name(CSource mode) {
    return mode == CSource::closed_form ? "closed-form" : "empirical";
}

CSource parse_c_mode(const std::string& s) {
    if (s == "closed-form") return CSource::closed_form;
    if (s == "empirical") return CSource::empirical;
    throw ConfigError("c_mode", "expected 'closed-form' or 'empirical', got '" + s + "'");
}

template <class T>
T get_field(const json& j, const char* key, const char* field) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(field, e.what());
    }
}

void reject_unknown(const json& j, std::initializer_list<const char*> known,
                    const std::string& prefix) {
    std::set<std::string> const allowed(known.begin(), known.end());
    for (auto const& [key, value] : j.items()) {
        if (!allowed.count(key)) throw ConfigError(prefix + key, "unknown key");
    }
}

}  // namespace

void validate(const ExperimentConfig& c) {
    if (c.n_paths == 0) throw ConfigError("n_paths", "must be positive");
    require_positive(c.horizon, "grid.horizon");
    require_positive(c.step, "grid.step");
    require_positive(c.far_step, "grid.far_step");
    if (c.start_refinement < 0 || c.start_refinement > 60) {
        throw ConfigError("grid.start_refinement", "must lie in [0, 60]");
    }
    if (c.model == ModelTag::inverse_bessel3) {
        try {
            (void)make_uniform_grid(c.horizon, c.step);
        } catch (const std::exception& e) {
            throw ConfigError("grid", e.what());
        }
    }
    if (c.max_depth < 1 || c.max_depth > kMaxDonDepth) {
        throw ConfigError("max_depth", "must lie in [1, " + std::to_string(kMaxDonDepth) + "]");
    }
    if (!(c.absorb_eps > 0.0 && c.absorb_eps < 1.0)) {
        throw ConfigError("absorb_eps", "must lie in (0, 1)");
    }
    if (c.c_mode == CSource::empirical && c.pilot_paths == 0) {
        throw ConfigError("pilot_paths", "must be positive");
    }
    if (c.tail_levels < 1) throw ConfigError("tail_levels", "must be >= 1");
    if (c.k_list.empty() || !strictly_increasing(c.k_list)) {
        throw ConfigError("k_list", "must be non-empty and strictly increasing");
    }
    for (double k : c.k_list) {
        if (!(k >= 1.0) || !std::isfinite(k)) throw ConfigError("k_list", "entries must be >= 1");
    }
    if (c.y_max_list.empty() || !strictly_increasing(c.y_max_list) || c.y_max_list.front() < 1) {
        throw ConfigError("y_max_list", "must be non-empty, >= 1 and strictly increasing");
    }
    if (c.y_max_list.back() > kThresholdCap) throw ConfigError("y_max_list", "entries above the threshold cap");
    if (c.control_level < 1) throw ConfigError("control_level", "must be >= 1");
    require_positive(c.checkpoint_time, "checkpoint_time");
    if (c.output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
}

ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<document>", e.what());
    }
    if (!j.is_object()) throw ConfigError("<document>", "expected a JSON object");
    reject_unknown(j,
                   {"model", "n_paths", "master_seed", "grid", "max_depth", "absorb_eps",
                    "c_mode", "pilot_paths", "tail_levels", "k_list", "y_max_list",
                    "control_level", "checkpoint_time", "output_dir", "workers", "dump_paths",
                    "quick"},
                   "");

    ExperimentConfig c;
    if (j.contains("model")) {
        try {
            c.model = parse_model_tag(get_field<std::string>(j, "model", "model"));
        } catch (const InvalidArgument& e) {
            throw ConfigError("model", e.what());
        }
    }
    if (j.contains("n_paths")) c.n_paths = get_field<std::size_t>(j, "n_paths", "n_paths");
    if (j.contains("master_seed")) c.master_seed = get_field<std::uint64_t>(j, "master_seed", "master_seed");
    if (j.contains("grid")) {
        json const& g = j.at("grid");
        if (!g.is_object()) throw ConfigError("grid", "expected an object");
        reject_unknown(g, {"horizon", "step", "far_step", "start_refinement"}, "grid.");
        if (g.contains("horizon")) c.horizon = get_field<double>(g, "horizon", "grid.horizon");
        if (g.contains("step")) c.step = get_field<double>(g, "step", "grid.step");
        if (g.contains("far_step")) c.far_step = get_field<double>(g, "far_step", "grid.far_step");
        if (g.contains("start_refinement")) {
            c.start_refinement = get_field<int>(g, "start_refinement", "grid.start_refinement");
        }
    }
    if (j.contains("max_depth")) c.max_depth = get_field<int>(j, "max_depth", "max_depth");
    if (j.contains("absorb_eps")) c.absorb_eps = get_field<double>(j, "absorb_eps", "absorb_eps");
    if (j.contains("c_mode")) c.c_mode = parse_c_mode(get_field<std::string>(j, "c_mode", "c_mode"));
    if (j.contains("pilot_paths")) c.pilot_paths = get_field<std::size_t>(j, "pilot_paths", "pilot_paths");
    if (j.contains("tail_levels")) c.tail_levels = get_field<std::uint64_t>(j, "tail_levels", "tail_levels");
    if (j.contains("k_list")) c.k_list = get_field<std::vector<double>>(j, "k_list", "k_list");
    if (j.contains("y_max_list")) {
        c.y_max_list = get_field<std::vector<std::uint64_t>>(j, "y_max_list", "y_max_list");
    }
    if (j.contains("control_level")) {
        c.control_level = get_field<std::uint64_t>(j, "control_level", "control_level");
    }
    if (j.contains("checkpoint_time")) {
        c.checkpoint_time = get_field<double>(j, "checkpoint_time", "checkpoint_time");
    }
    if (j.contains("output_dir")) c.output_dir = get_field<std::string>(j, "output_dir", "output_dir");
    if (j.contains("workers")) c.workers = get_field<unsigned>(j, "workers", "workers");
    if (j.contains("dump_paths")) c.dump_paths = get_field<bool>(j, "dump_paths", "dump_paths");
    if (j.contains("quick")) c.quick = get_field<bool>(j, "quick", "quick");
    validate(c);
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string to_json(const ExperimentConfig& c) {
    json j;
    j["model"] = to_string(c.model);
    j["n_paths"] = c.n_paths;
    j["master_seed"] = c.master_seed;
    j["grid"] = {{"horizon", c.horizon},
                 {"step", c.step},
                 {"far_step", c.far_step},
                 {"start_refinement", c.start_refinement}};
    j["max_depth"] = c.max_depth;
    j["absorb_eps"] = c.absorb_eps;
    j["c_mode"] = c_mode_name(c.c_mode);
    j["pilot_paths"] = c.pilot_paths;
    j["tail_levels"] = c.tail_levels;
    j["k_list"] = c.k_list;
    j["y_max_list"] = c.y_max_list;
    j["control_level"] = c.control_level;
    j["checkpoint_time"] = c.checkpoint_time;
    j["output_dir"] = c.output_dir;
    j["workers"] = c.workers;
    j["dump_paths"] = c.dump_paths;
    j["quick"] = c.quick;
    return j.dump(2);
}

ModelParams model_params(const ExperimentConfig& c) {
    if (c.model == ModelTag::double_or_nothing) return DoubleOrNothingParams{c.max_depth};
    InverseBessel3Params p;
    p.grid = make_uniform_grid(c.horizon, c.step);
    p.far_step = c.far_step;
    p.start_refinement = c.start_refinement;
    p.absorb_eps = c.absorb_eps;
    p.checkpoints = {c.checkpoint_time};
    return p;
}

unsigned effective_workers(const ExperimentConfig& c) {
    return c.workers == 0 ? default_workers() : c.workers;
}

}  // namespace uimart
