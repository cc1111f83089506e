// Microbenchmarks for the hot paths of the identification pipeline: the
// forward solve, the adjoint solve plus gradient assembly, the Helmholtz
// smoother and a full cost evaluation.

#include <benchmark/benchmark.h>

#include <cmath>

#include "oscid/adjoint.hpp"
#include "oscid/model.hpp"
#include "oscid/optimize.hpp"
#include "oscid/pod.hpp"
#include "oscid/sobolev.hpp"

using namespace oscid;

namespace {

model::DescriptorModel reference_truth() {
    const double sigma1 = 0.151, r_circle = 2.3;
    return model::landau_ground_truth(sigma1, sigma1 / (r_circle * r_circle), 0.886,
                                      0.15 / (r_circle * r_circle), 75, 1.0);
}

const model::Measurements& reference_measurements() {
    static const model::Measurements meas = model::synthesize_measurements(
        reference_truth(), {0.023, 0.0}, 70.0, 500, {}, 1e-8, 1e-8);
    return meas;
}

model::DescriptorModel biased_iterate() {
    auto m = reference_truth();
    for (int k = 0; k < 75; ++k) m.g1[k] *= 0.8;
    m.g1.set_tags({});
    m.g2 = GridFunction(2.3, 75, 0.0);
    return m;
}

void bm_forward_solve(benchmark::State& state) {
    const auto m = biased_iterate();
    for (auto _ : state) {
        auto sim = model::simulate(m, {0.023, 0.0}, 70.0, 500, 1e-8, 1e-8);
        benchmark::DoNotOptimize(sim.r.back());
    }
}
BENCHMARK(bm_forward_solve);

void bm_cost_j1(benchmark::State& state) {
    const auto m = biased_iterate();
    const auto& meas = reference_measurements();
    optimize::IdentificationConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(optimize::evaluate_j1(m, meas, cfg));
    }
}
BENCHMARK(bm_cost_j1);

void bm_adjoint_and_gradient(benchmark::State& state) {
    const auto m = biased_iterate();
    const auto& meas = reference_measurements();
    const auto sim = model::simulate(m, {0.023, 0.0}, 70.0, 500, 1e-8, 1e-8);
    adjoint::SolveOptions opts;
    for (auto _ : state) {
        const auto costate =
            adjoint::solve_adjoint(m, sim.solution, meas, adjoint::Problem::p1, opts);
        const auto grad = adjoint::assemble_l2_gradient(sim.solution, costate,
                                                        adjoint::Problem::p1, m.g1);
        benchmark::DoNotOptimize(grad[37]);
    }
}
BENCHMARK(bm_adjoint_and_gradient);

void bm_helmholtz_solve(benchmark::State& state) {
    const auto n = static_cast<int>(state.range(0));
    auto rhs = GridFunction::from_function(2.3, n,
                                           [](double r) { return std::sin(2.0 * r); });
    for (auto _ : state) {
        const auto u =
            sobolev::solve_helmholtz(rhs, 1.0, sobolev::RightCondition::dirichlet, 0.0);
        benchmark::DoNotOptimize(u[1]);
    }
}
BENCHMARK(bm_helmholtz_solve)->Arg(75)->Arg(297);

void bm_snapshot_pod(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    pod::SnapshotEnsemble ens;
    ens.n_components = 2;
    ens.weights.assign(256, 1.0);
    ens.snapshots.assign(m, std::vector<double>(512));
    std::uint64_t seed = 0x9e3779b97f4a7c15ull;
    for (auto& snap : ens.snapshots) {
        for (auto& v : snap) {
            seed = seed * 6364136223846793005ull + 1442695040888963407ull;
            v = static_cast<double>(seed >> 11) / 9007199254740992.0 - 0.5;
        }
    }
    for (auto _ : state) {
        const auto res = pod::snapshot_pod(ens);
        benchmark::DoNotOptimize(res.eigenvalues[0]);
    }
}
BENCHMARK(bm_snapshot_pod)->Arg(8)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
