#include "ood/runner.hpp"

#include <algorithm>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ood/detectors.hpp"
#include "ood/errors.hpp"
#include "ood/rng.hpp"
#include "ood/version.hpp"

namespace ood {

namespace {

constexpr std::uint64_t kSpecTag = 1;
constexpr std::uint64_t kShiftTag = 2;
constexpr std::uint64_t kIdSamplesTag = 3;
constexpr std::uint64_t kOodSamplesTag = 4;

std::uint64_t sweep_kind_tag(ShiftKind kind) {
    return kind == ShiftKind::Semantic ? 1 : 2;
}

struct CellParams {
    int n_semantic;
    double parameter;
};

struct TrialPair {
    EvalReport msp;
    EvalReport density;
};

// One trial: seeded specs, seeded samples, both oracles, both metrics.
TrialPair run_trial(const SweepConfig& config, ShiftKind kind, const CellParams& cell,
                    std::uint64_t trial_seed) {
    const GmmSpec id_spec =
        build_id_spec(config.total_dims, cell.n_semantic, config.semantic_magnitude,
                      rng::combine(trial_seed, kSpecTag));

    ShiftSpec shift;
    shift.kind = kind;
    shift.overlap_rate = cell.parameter;
    shift.displacement_alpha = cell.parameter;
    shift.seed = rng::combine(trial_seed, kShiftTag);
    const GmmSpec ood_spec = apply_shift(id_spec, shift);

    const SampleSet id_samples =
        sample(id_spec, config.samples_per_side, rng::combine(trial_seed, kIdSamplesTag),
               Origin::InDistribution);
    const SampleSet ood_samples =
        sample(ood_spec, config.samples_per_side, rng::combine(trial_seed, kOodSamplesTag),
               Origin::OutOfDistribution);

    const LinearPosterior posterior = fit_lda(id_spec);

    const ScoreSet msp_id = score_sampleset(posterior, id_samples);
    const ScoreSet msp_ood = score_sampleset(posterior, ood_samples);
    const ScoreSet dens_id = score_sampleset(id_spec, id_samples);
    const ScoreSet dens_ood = score_sampleset(id_spec, ood_samples);

    TrialPair out;
    out.msp = {auroc(msp_id.values, msp_ood.values), far95(msp_id.values, msp_ood.values),
               config.samples_per_side, config.samples_per_side, "msp_oracle"};
    out.density = {auroc(dens_id.values, dens_ood.values),
                   far95(dens_id.values, dens_ood.values), config.samples_per_side,
                   config.samples_per_side, "density_oracle"};
    return out;
}

SweepResult run_sweep(const SweepConfig& config, ShiftKind kind,
                      const std::vector<CellParams>& cells, int threads) {
    const int n_cells = static_cast<int>(cells.size());
    const int n_trials = config.n_trials;
    const std::uint64_t kind_seed =
        rng::combine(config.master_seed, sweep_kind_tag(kind));

    std::vector<TrialPair> trials(static_cast<std::size_t>(n_cells) * n_trials);

    int workers = threads;
#ifdef _OPENMP
    if (workers <= 0) workers = omp_get_max_threads();
#else
    workers = 1;
#endif

    const int n_tasks = n_cells * n_trials;
#pragma omp parallel for schedule(dynamic) num_threads(workers)
    for (int task = 0; task < n_tasks; ++task) {
        const int cell_index = task / n_trials;
        const int trial_index = task % n_trials;
        const std::uint64_t trial_seed =
            rng::combine(kind_seed, static_cast<std::uint64_t>(cell_index),
                         static_cast<std::uint64_t>(trial_index));
        trials[task] = run_trial(config, kind, cells[cell_index], trial_seed);
    }

    SweepResult result;
    result.kind = kind;
    result.config = config;
    result.cells.reserve(2 * n_cells);
    for (int c = 0; c < n_cells; ++c) {
        std::vector<EvalReport> msp_reports;
        std::vector<EvalReport> dens_reports;
        msp_reports.reserve(n_trials);
        dens_reports.reserve(n_trials);
        for (int t = 0; t < n_trials; ++t) {
            msp_reports.push_back(trials[c * n_trials + t].msp);
            dens_reports.push_back(trials[c * n_trials + t].density);
        }
        for (auto* reports : {&msp_reports, &dens_reports}) {
            DetectorCell cell;
            cell.cell_index = c;
            cell.n_semantic = cells[c].n_semantic;
            cell.parameter = cells[c].parameter;
            cell.detector = reports->front().detector_name;
            cell.stats = config.n_trials >= 2
                             ? aggregate_trials(*reports)
                             : SweepCell{0.0, *reports, reports->front().auroc, 0.0,
                                         reports->front().far95, 0.0};
            cell.stats.sweep_parameter = cells[c].parameter;
            result.cells.push_back(std::move(cell));
        }
    }
    return result;
}

void validate_common(const SweepConfig& config) {
    if (config.total_dims < 2) throw ValidationError("total_dims must be >= 2");
    if (config.samples_per_side < 1)
        throw ValidationError("samples_per_side must be >= 1");
    if (config.n_trials < 1) throw ValidationError("n_trials must be >= 1");
    if (!(config.semantic_magnitude > 0.0))
        throw ValidationError("semantic_magnitude must be positive");
    if (config.grid.empty()) throw ValidationError("grid must be nonempty");
    if (!std::is_sorted(config.grid.begin(), config.grid.end()))
        throw ValidationError("grid must be sorted ascending");
}

} // namespace

std::vector<double> SweepConfig::default_overlap_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
    return grid;
}

std::vector<double> SweepConfig::default_alpha_grid() {
    return {0.05, 0.1, 0.2, 0.5, 1.0};
}

std::vector<int> SweepConfig::default_dims_splits() {
    std::vector<int> splits;
    for (int n = 20; n <= 180; n += 20) splits.push_back(n);
    return splits;
}

SweepConfig SweepConfig::semantic_defaults() {
    SweepConfig config;
    config.grid = default_overlap_grid();
    return config;
}

SweepConfig SweepConfig::background_defaults() {
    SweepConfig config;
    config.grid = default_alpha_grid();
    config.dims_splits = default_dims_splits();
    return config;
}

void validate_semantic_config(const SweepConfig& config) {
    validate_common(config);
    if (config.n_semantic < 1 || config.n_semantic >= config.total_dims)
        throw ValidationError("n_semantic must satisfy 1 <= n_semantic < total_dims");
    for (double r : config.grid) {
        if (!(r >= 0.0 && r <= 1.0))
            throw ValidationError("semantic sweep grid values must lie in [0, 1]");
    }
}

void validate_background_config(const SweepConfig& config) {
    validate_common(config);
    for (double a : config.grid) {
        if (!(a >= 0.0))
            throw ValidationError("background sweep alpha values must be >= 0");
    }
    if (config.dims_splits.empty())
        throw ValidationError("dims_splits must be nonempty");
    for (int n : config.dims_splits) {
        if (n < 1 || n >= config.total_dims)
            throw ValidationError("every dims split must leave at least one background dimension");
    }
}

SweepResult run_semantic_sweep(const SweepConfig& config, int threads) {
    validate_semantic_config(config);
    std::vector<CellParams> cells;
    cells.reserve(config.grid.size());
    for (double r : config.grid) cells.push_back({config.n_semantic, r});
    return run_sweep(config, ShiftKind::Semantic, cells, threads);
}

SweepResult run_background_sweep(const SweepConfig& config, int threads) {
    validate_background_config(config);
    std::vector<CellParams> cells;
    cells.reserve(config.dims_splits.size() * config.grid.size());
    for (int n : config.dims_splits) {
        for (double alpha : config.grid) cells.push_back({n, alpha});
    }
    return run_sweep(config, ShiftKind::Background, cells, threads);
}

std::string format_fixed6(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    return buf;
}

std::string sweep_csv(const SweepResult& result) {
    const char* sweep_name = result.kind == ShiftKind::Semantic ? "semantic" : "background";
    std::string csv = "sweep,n_semantic,overlap_or_alpha,detector,trial,auroc,far95\n";
    for (const DetectorCell& cell : result.cells) {
        for (std::size_t t = 0; t < cell.stats.trials.size(); ++t) {
            const EvalReport& r = cell.stats.trials[t];
            csv += sweep_name;
            csv += ',';
            csv += std::to_string(cell.n_semantic);
            csv += ',';
            csv += format_fixed6(cell.parameter);
            csv += ',';
            csv += cell.detector;
            csv += ',';
            csv += std::to_string(t);
            csv += ',';
            csv += format_fixed6(r.auroc);
            csv += ',';
            csv += format_fixed6(r.far95);
            csv += '\n';
        }
    }
    return csv;
}

nlohmann::json sweep_summary_json(const SweepResult& result) {
    nlohmann::json cells = nlohmann::json::array();
    for (const DetectorCell& cell : result.cells) {
        cells.push_back({
            {"cell_index", cell.cell_index},
            {"n_semantic", cell.n_semantic},
            {"parameter", cell.parameter},
            {"shift_strength", result.kind == ShiftKind::Semantic
                                   ? 1.0 - cell.parameter
                                   : cell.parameter},
            {"detector", cell.detector},
            {"n_trials", cell.stats.trials.size()},
            {"mean_auroc", cell.stats.mean_auroc},
            {"auroc_ci_halfwidth", cell.stats.auroc_ci_halfwidth},
            {"mean_far95", cell.stats.mean_far95},
            {"far95_ci_halfwidth", cell.stats.far95_ci_halfwidth},
        });
    }
    return nlohmann::json{
        {"schema_version", kSchemaVersion},
        {"sweep", result.kind == ShiftKind::Semantic ? "semantic" : "background"},
        {"config", sweep_config_to_json(result.config, result.kind)},
        {"cells", cells},
    };
}

nlohmann::json sweep_config_to_json(const SweepConfig& config, ShiftKind kind) {
    nlohmann::json j{
        {"schema_version", kSchemaVersion},
        {"sweep", kind == ShiftKind::Semantic ? "semantic" : "background"},
        {"total_dims", config.total_dims},
        {"samples_per_side", config.samples_per_side},
        {"n_trials", config.n_trials},
        {"master_seed", config.master_seed},
        {"semantic_magnitude", config.semantic_magnitude},
        {"grid", config.grid},
    };
    if (kind == ShiftKind::Semantic) {
        j["n_semantic"] = config.n_semantic;
    } else {
        j["dims_splits"] = config.dims_splits;
    }
    return j;
}

SweepConfig sweep_config_from_json(const nlohmann::json& j, ShiftKind kind) {
    SweepConfig config = kind == ShiftKind::Semantic ? SweepConfig::semantic_defaults()
                                                     : SweepConfig::background_defaults();
    try {
        if (j.contains("schema_version") && j.at("schema_version").get<int>() != kSchemaVersion)
            throw ValidationError("unsupported config schema_version");
        if (j.contains("total_dims")) config.total_dims = j.at("total_dims").get<int>();
        if (j.contains("n_semantic")) config.n_semantic = j.at("n_semantic").get<int>();
        if (j.contains("samples_per_side"))
            config.samples_per_side = j.at("samples_per_side").get<int>();
        if (j.contains("n_trials")) config.n_trials = j.at("n_trials").get<int>();
        if (j.contains("master_seed"))
            config.master_seed = j.at("master_seed").get<std::uint64_t>();
        if (j.contains("semantic_magnitude"))
            config.semantic_magnitude = j.at("semantic_magnitude").get<double>();
        if (j.contains("grid")) config.grid = j.at("grid").get<std::vector<double>>();
        if (j.contains("dims_splits"))
            config.dims_splits = j.at("dims_splits").get<std::vector<int>>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed sweep config: ") + e.what());
    }
    return config;
}

} // namespace ood
