#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "uimart/construction.hpp"
#include "uimart/models.hpp"

namespace uimart {

enum class CSource { closed_form, empirical };

/// One experiment. Loaded from a JSON document; CLI flags override fields.
struct ExperimentConfig {
    ModelTag model = ModelTag::inverse_bessel3;
    std::size_t n_paths = 10'000;
    std::uint64_t master_seed = 20'240'601;
    double horizon = 1.0e4;
    double step = 1.0e-3;
    double far_step = 2.0e-2;
    int start_refinement = 24;
    int max_depth = kMaxDonDepth;
    double absorb_eps = 1.0e-4;
    CSource c_mode = CSource::closed_form;
    std::size_t pilot_paths = 10'000;  // empirical c-sequence only
    std::uint64_t tail_levels = 64;
    std::vector<double> k_list{10.0, 100.0, 1000.0};
    std::vector<std::uint64_t> y_max_list{1, 4, 32};
    std::uint64_t control_level = 2;
    double checkpoint_time = 1.0;
    std::string output_dir = "uimart-out";
    unsigned workers = 0;  // 0 = hardware concurrency
    bool dump_paths = false;
    bool quick = false;
};

/// Throws ConfigError naming the first invalid field (e.g. "grid.step").
void validate(const ExperimentConfig& config);

/// Parses a JSON document; unknown keys are rejected. Missing keys keep their
/// defaults.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

/// Canonical JSON echo (stable key order, round-trip numbers).
std::string to_json(const ExperimentConfig& config);

ModelParams model_params(const ExperimentConfig& config);
unsigned effective_workers(const ExperimentConfig& config);

}  // namespace uimart
