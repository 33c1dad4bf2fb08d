// Compares the serial reference client loop against the OpenMP one on a
// medium synthetic workload and verifies they agree bit-for-bit.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fedsim/fedopt.hpp"

using namespace fedsim;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

TrainResult timed_run(const ModelSpec& mspec, const Dataset& train, const Dataset& test,
                      const ClientPartition& part, const AlgoConfig& cfg, Exec exec,
                      double* elapsed) {
    TrainOptions opts;
    opts.exec = exec;
    opts.collect_masks = false;
    const auto t0 = std::chrono::steady_clock::now();
    TrainResult r = run_training(mspec, train, test, part, cfg, /*seed=*/42, opts);
    *elapsed = seconds_since(t0);
    return r;
}

} // namespace

int main() {
    // One draw, split class-major so train and test share the same centers.
    const Dataset full = make_synthetic(10, 64, 700, 3.0, 7);
    Dataset train;
    Dataset test;
    train.num_classes = test.num_classes = 10;
    for (int k = 0; k < 10; ++k) {
        for (int s = 0; s < 700; ++s) {
            const std::size_t i = static_cast<std::size_t>(k) * 700 + static_cast<std::size_t>(s);
            (s < 600 ? train : test).features.push_back(full.features[i]);
            (s < 600 ? train : test).labels.push_back(k);
        }
    }

    ModelSpec mspec;
    mspec.kind = ModelKind::mlp;
    mspec.input_dim = 64;
    mspec.hidden_dim = 32;
    mspec.num_classes = 10;

    PartitionSpec ps;
    ps.num_clients = 16;
    ps.alpha = 0.1;
    ps.seed = 42;
    ps.min_batches = 2;
    ps.batch_size = 32;
    const ClientPartition part = dirichlet_partition(train, ps);

    AlgoConfig cfg;
    cfg.algorithm = Algorithm::fedavg;
    cfg.ecgr_enabled = true;
    cfg.beta = 0.2;
    cfg.lr = 0.05;
    cfg.batch_size = 32;
    cfg.rounds = 10;

#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP; both runs are serial\n");
#endif

    double t_serial = 0.0;
    double t_parallel = 0.0;
    const TrainResult serial = timed_run(mspec, train, test, part, cfg, Exec::serial, &t_serial);
    const TrainResult parallel =
        timed_run(mspec, train, test, part, cfg, Exec::parallel, &t_parallel);

    const bool identical = serial.final_params == parallel.final_params;
    std::printf("serial:   %.3f s\n", t_serial);
    std::printf("parallel: %.3f s (speedup %.2fx)\n", t_parallel,
                t_parallel > 0.0 ? t_serial / t_parallel : 0.0);
    std::printf("final parameters bit-identical: %s\n", identical ? "yes" : "NO");
    std::printf("final accuracy: %.4f\n", serial.metrics.back().test_accuracy);
    return identical ? 0 : 1;
}
