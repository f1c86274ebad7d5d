#pragma once

// End-to-end sweep protocols: per (cell, trial), build the ID spec, apply the
// shift, draw samples from both, score with the MSP and density oracles, and
// evaluate. Trials are embarrassingly parallel; per-trial seeds derive from
// the master seed as combine(combine(combine(master, kind), cell), trial), so
// output is byte-identical for any worker count.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ood/metrics.hpp"
#include "ood/simcore.hpp"

namespace ood {

struct SweepConfig {
    int total_dims = 200;
    int n_semantic = 40; // semantic sweep only; background sweep uses dims_splits
    int samples_per_side = 10000;
    int n_trials = 20;
    std::uint64_t master_seed = kDefaultMasterSeed;
    double semantic_magnitude = 1.0;
    std::vector<double> grid;       // overlap levels (semantic) or alphas (background)
    std::vector<int> dims_splits;   // background sweep: semantic dim counts

    static constexpr std::uint64_t kDefaultMasterSeed = 1;

    static std::vector<double> default_overlap_grid(); // 0.0 .. 1.0 step 0.1
    static std::vector<double> default_alpha_grid();   // 0.05 0.1 0.2 0.5 1.0
    static std::vector<int> default_dims_splits();     // 20 40 .. 180

    static SweepConfig semantic_defaults();
    static SweepConfig background_defaults();
};

// One aggregated (cell, detector) result.
struct DetectorCell {
    int cell_index = 0;
    int n_semantic = 0;
    double parameter = 0.0; // overlap rate or alpha
    std::string detector;
    SweepCell stats;
};

struct SweepResult {
    ShiftKind kind = ShiftKind::Semantic;
    SweepConfig config;
    std::vector<DetectorCell> cells; // cell-major, msp_oracle before density_oracle
};

// threads = 0 uses the OpenMP default; any positive value caps the worker
// count without changing any output byte.
SweepResult run_semantic_sweep(const SweepConfig& config, int threads = 0);
SweepResult run_background_sweep(const SweepConfig& config, int threads = 0);

void validate_semantic_config(const SweepConfig& config);
void validate_background_config(const SweepConfig& config);

// CSV with header sweep,n_semantic,overlap_or_alpha,detector,trial,auroc,far95;
// '.' decimal, LF line endings, 6-decimal fixed metric values.
std::string sweep_csv(const SweepResult& result);

nlohmann::json sweep_summary_json(const SweepResult& result);

nlohmann::json sweep_config_to_json(const SweepConfig& config, ShiftKind kind);
SweepConfig sweep_config_from_json(const nlohmann::json& j, ShiftKind kind);

std::string format_fixed6(double value);

} // namespace ood
