// Benchmark comparing the OpenMP kernels against their serial references.
// Also asserts bitwise equality of the two paths on every workload.

#include <chrono>
#include <cstdio>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ood/detectors.hpp"
#include "ood/runner.hpp"
#include "ood/simcore.hpp"

using namespace ood;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void report(const std::string& name, double serial_ms, double parallel_ms, bool identical) {
    std::printf("%-28s %10.1f ms %10.1f ms %7.2fx   %s\n", name.c_str(), serial_ms,
                parallel_ms, serial_ms / parallel_ms, identical ? "identical" : "MISMATCH");
}

} // namespace

int main(int argc, char** argv) {
    int count = 100000;
    if (argc > 1) count = std::atoi(argv[1]);

#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP\n");
#endif
    std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "openmp", "speedup");

    const GmmSpec spec = build_id_spec(200, 40, 1.0, 7);
    const LinearPosterior posterior = fit_lda(spec);
    bool all_identical = true;

    {
        auto t0 = Clock::now();
        const SampleSet serial_samples = serial::sample(spec, count, 42);
        const double serial_ms = ms_since(t0);
        t0 = Clock::now();
        const SampleSet parallel_samples = sample(spec, count, 42);
        const double parallel_ms = ms_since(t0);
        const bool same = serial_samples.features == parallel_samples.features &&
                          serial_samples.labels == parallel_samples.labels;
        all_identical &= same;
        report("sample " + std::to_string(count) + "x200", serial_ms, parallel_ms, same);

        t0 = Clock::now();
        const ScoreSet serial_msp = serial::score_sampleset(posterior, parallel_samples);
        const double msp_serial_ms = ms_since(t0);
        t0 = Clock::now();
        const ScoreSet parallel_msp = score_sampleset(posterior, parallel_samples);
        const double msp_parallel_ms = ms_since(t0);
        const bool msp_same = serial_msp.values == parallel_msp.values;
        all_identical &= msp_same;
        report("msp oracle scores", msp_serial_ms, msp_parallel_ms, msp_same);

        t0 = Clock::now();
        const ScoreSet serial_dens = serial::score_sampleset(spec, parallel_samples);
        const double dens_serial_ms = ms_since(t0);
        t0 = Clock::now();
        const ScoreSet parallel_dens = score_sampleset(spec, parallel_samples);
        const double dens_parallel_ms = ms_since(t0);
        const bool dens_same = serial_dens.values == parallel_dens.values;
        all_identical &= dens_same;
        report("density oracle scores", dens_serial_ms, dens_parallel_ms, dens_same);
    }

    {
        SweepConfig config;
        config.total_dims = 50;
        config.n_semantic = 10;
        config.samples_per_side = 2000;
        config.n_trials = 5;
        config.master_seed = 7;
        config.grid = {0.0, 0.5, 1.0};

        auto t0 = Clock::now();
        const std::string serial_csv = sweep_csv(run_semantic_sweep(config, 1));
        const double serial_ms = ms_since(t0);
        t0 = Clock::now();
        const std::string parallel_csv = sweep_csv(run_semantic_sweep(config, 0));
        const double parallel_ms = ms_since(t0);
        const bool same = serial_csv == parallel_csv;
        all_identical &= same;
        report("semantic sweep (small)", serial_ms, parallel_ms, same);
    }

    if (!all_identical) {
        std::printf("FAILED: a parallel kernel diverged from the serial reference\n");
        return 1;
    }
    return 0;
}
