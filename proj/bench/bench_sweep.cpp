// Compares the OpenMP sweep dispatcher against the serial reference and
// checks that both produce identical bytes.
#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mfris/sweep.hpp"
#include "mfris/units.hpp"

using namespace mfris;

int main(int argc, char** argv) {
    int trials = argc > 1 ? std::atoi(argv[1]) : 4;

    ScenarioConfig cfg;
    cfg.N = 2;
    cfg.K = 2;
    cfg.M = 4;
    cfg.geometry.ris_position = {4.0, 2.0, 6.0};
    cfg.rng_seed = 7;
    validate(cfg);

    AlgorithmOptions opts;
    SweepSpec spec;
    spec.variable = SweepVariable::TransmitPower;
    spec.grid = {30.0, 33.0, 36.0};
    spec.trials = trials;
    spec.schemes = {Scheme::MfRis, Scheme::NoRis};

    auto time_run = [&](bool parallel) {
        spec.parallel = parallel;
        const auto t0 = std::chrono::steady_clock::now();
        const SweepResult res = run_sweep(cfg, spec, opts);
        const double ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
        return std::make_pair(ms, csv_string(res.rows));
    };

    const auto [serial_ms, serial_csv] = time_run(false);
    const auto [parallel_ms, parallel_csv] = time_run(true);

    int threads = 1;
#ifdef _OPENMP
    threads = omp_get_max_threads();
#endif
    std::printf("tasks          : %zu\n", spec.grid.size() * trials * spec.schemes.size());
    std::printf("serial         : %10.1f ms\n", serial_ms);
    std::printf("openmp (%2d thr): %10.1f ms  (speedup %.2fx)\n", threads, parallel_ms,
                serial_ms / parallel_ms);
    std::printf("identical bytes: %s\n", serial_csv == parallel_csv ? "yes" : "NO");
    return serial_csv == parallel_csv ? 0 : 1;
}
