#include <benchmark/benchmark.h>

#include "stallpred/backprop.hpp"
#include "stallpred/fit.hpp"
#include "stallpred/gp.hpp"
#include "stallpred/synthgen.hpp"

using namespace stallpred;

namespace {

Matrix random_window(std::uint64_t seed) {
    Matrix m(16, 10);
    Rng rng(seed);
    for (double& v : m.data) v = rng.normal();
    return m;
}

void BM_ArchAForward(benchmark::State& state) {
    Model m = init_model(arch_a(), 1);
    Matrix w = random_window(2);
    ForwardTrace trace;
    for (auto _ : state) benchmark::DoNotOptimize(forward_trace(m, w, {}, trace));
}
BENCHMARK(BM_ArchAForward);

void BM_ArchAForwardBackward(benchmark::State& state) {
    Model m = init_model(arch_a(), 1);
    Matrix w = random_window(2);
    ForwardTrace trace;
    ParamSet grads = zeros_like(m.params);
    for (auto _ : state) {
        forward_trace(m, w, {}, trace);
        model_backward_into(m, trace, 1.0, grads);
        benchmark::DoNotOptimize(grads);
    }
}
BENCHMARK(BM_ArchAForwardBackward);

void BM_PresetForward(benchmark::State& state, const char* preset) {
    Model m = init_model(spec_preset(preset), 1);
    Matrix w = random_window(2);
    ForwardTrace trace;
    for (auto _ : state) benchmark::DoNotOptimize(forward_trace(m, w, {}, trace));
}
BENCHMARK_CAPTURE(BM_PresetForward, arch_b, "arch-b");
BENCHMARK_CAPTURE(BM_PresetForward, arch_c, "arch-c");

void BM_AdamStepArchA(benchmark::State& state) {
    Model m = init_model(arch_a(), 1);
    AdamState st = make_adam_state(m.params);
    ParamSet grads = zeros_like(m.params);
    for_each_tensor(grads, [](std::string_view, std::vector<double>& t) {
        for (double& v : t) v = 1e-3;
    });
    TrainConfig cfg;
    for (auto _ : state) {
        adam_step(st, m.params, grads, cfg);
        benchmark::DoNotOptimize(m.params);
    }
}
BENCHMARK(BM_AdamStepArchA);

void BM_GenerateGradualFlight(benchmark::State& state) {
    FlightProfile p;
    p.kind = ProfileKind::GradualStall;
    p.seed = 3;
    for (auto _ : state) benchmark::DoNotOptimize(generate_flight(p));
}
BENCHMARK(BM_GenerateGradualFlight);

void BM_GpFitPosterior(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    Rng rng(5);
    std::vector<Observation> obs;
    for (std::size_t i = 0; i < n; ++i)
        obs.push_back({{rng.uniform(), rng.uniform(), rng.uniform()}, rng.uniform()});
    SeKernel k;
    k.length_scales = {0.2, 0.2, 0.2};
    k.signal_var = 1.0;
    k.noise_var = 1e-6;
    const Vector probe{0.4, 0.5, 0.6};
    for (auto _ : state) {
        GpSurrogate s = gp_fit(obs, k);
        benchmark::DoNotOptimize(gp_posterior(s, probe));
    }
}
BENCHMARK(BM_GpFitPosterior)->Arg(10)->Arg(25)->Arg(50);

}  // namespace

BENCHMARK_MAIN();
