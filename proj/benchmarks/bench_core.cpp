#include <benchmark/benchmark.h>

#include "phuber/distribution.hpp"
#include "phuber/fusion.hpp"
#include "phuber/harness.hpp"
#include "phuber/mapping.hpp"
#include "phuber/special_functions.hpp"

namespace {

phuber::DistParams bench_params() {
    phuber::DistParams p;
    p.mu_p << 0.2, -0.1;
    p.mu_z = 3.5;
    p.A << 1.4, 0.3, 0.3, 0.9;
    p.a = 4.0;
    return p;
}

void BM_G1Quadrature(benchmark::State& state) {
    double a = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(phuber::g1(a));
        a += 1e-9;  // defeat the repeated-argument cache
    }
}
BENCHMARK(BM_G1Quadrature);

void BM_G1Fast(benchmark::State& state) {
    double a = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(phuber::detail::g1_fast(a));
        a += 1e-9;
    }
}
BENCHMARK(BM_G1Fast);

void BM_LogPdf(benchmark::State& state) {
    const phuber::DistParams p = bench_params();
    const phuber::Point3 v(0.4, -0.6, 3.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(phuber::log_pdf(v, p));
    }
}
BENCHMARK(BM_LogPdf);

void BM_Sample(benchmark::State& state) {
    const phuber::DistParams p = bench_params();
    for (auto _ : state) {
        benchmark::DoNotOptimize(phuber::sample(p, state.range(0), 7));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Sample)->Arg(1024);

void BM_LossFromRaw(benchmark::State& state) {
    phuber::RawOutput w;
    w << 0.3, -0.2, 0.1, 0.5, -0.4, 1.2, 0.8;
    phuber::NormalizedObservation obs;
    obs.v_p << 0.4, -0.3;
    obs.z_p = 1.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(phuber::loss_from_raw(w, obs));
    }
}
BENCHMARK(BM_LossFromRaw);

void BM_Fuse4Views(benchmark::State& state) {
    phuber::ScenarioConfig config;
    config.n_views = 4;
    config.truth = phuber::Point3(0.3, -0.2, 0.1);
    config.rig_radius = 5.0;
    config.seed = 99;
    const auto views = phuber::simulate_rig(config);
    for (auto _ : state) {
        benchmark::DoNotOptimize(phuber::fuse(views));
    }
}
BENCHMARK(BM_Fuse4Views);

}  // namespace
