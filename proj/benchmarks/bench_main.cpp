#include <benchmark/benchmark.h>

#include "dyncs/dcs_amp.hpp"
#include "dyncs/engine.hpp"
#include "dyncs/simulate.hpp"
#include "dyncs/solvers.hpp"
#include "dyncs/rng.hpp"
#include "dyncs/wavelet.hpp"

namespace {

using namespace dyncs;

struct Fixture {
    MeasurementOperator a = make_gaussian_operator(60, 256, 7, true);
    Vec x;
    Vec y;
    Fixture() {
        Rng rng(99);
        x = Vec::Zero(256);
        for (int k = 0; k < 25; ++k) x[k * 10] = 2.0 + rng.uniform();
        y = add_noise(a.apply(x), 4e-4, 3);
    }
};

void BM_bpdn_solve(benchmark::State& state) {
    Fixture f;
    const double gamma = 0.05 * f.a.adjoint(f.y).lpNorm<Eigen::Infinity>();
    for (auto _ : state) {
        LagrangianSpec spec;
        spec.weights = Vec::Constant(256, gamma);
        benchmark::DoNotOptimize(solve_lagrangian_l1(f.a, f.y, spec));
    }
}
BENCHMARK(BM_bpdn_solve);

void BM_modcs_warm(benchmark::State& state) {
    Fixture f;
    const double gamma = 0.05 * f.a.adjoint(f.y).lpNorm<Eigen::Infinity>();
    LagrangianSpec spec;
    spec.weights = Vec::Constant(256, gamma);
    for (Index i = 0; i < 256; i += 10) spec.weights[i] = 0.0; // known support free
    SolverResult first = solve_lagrangian_l1(f.a, f.y, spec);
    for (auto _ : state) {
        SolverOptions opts;
        opts.warm_start = &first.xhat;
        benchmark::DoNotOptimize(solve_lagrangian_l1(f.a, f.y, spec, opts));
    }
}
BENCHMARK(BM_modcs_warm);

void BM_bp_equality(benchmark::State& state) {
    Fixture f;
    const Vec y0 = f.a.apply(f.x);
    for (auto _ : state)
        benchmark::DoNotOptimize(solve_constrained_l1(f.a, y0, Vec::Ones(256), 0.0));
}
BENCHMARK(BM_bp_equality);

void BM_amp_step(benchmark::State& state) {
    Fixture f;
    AmpParams params;
    params.lambda = 0.1;
    params.zeta = 2.0;
    AmpState st = AmpState::initial(256, params);
    st.record_history = false;
    for (auto _ : state) {
        AmpState copy = st;
        dcs_amp_filter_step(copy, f.y, f.a);
        benchmark::DoNotOptimize(copy.xhat);
    }
}
BENCHMARK(BM_amp_step);

void BM_dwt2_roundtrip(benchmark::State& state) {
    Mat img = Mat::Random(64, 64);
    for (auto _ : state) {
        Mat c = dwt2_forward(img, 2);
        benchmark::DoNotOptimize(dwt2_inverse(c, 2));
    }
}
BENCHMARK(BM_dwt2_roundtrip);

} // namespace

BENCHMARK_MAIN();
