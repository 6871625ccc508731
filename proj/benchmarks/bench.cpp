#include <benchmark/benchmark.h>

#include "superbsde/forward.hpp"
#include "superbsde/mcsolver.hpp"
#include "superbsde/pde.hpp"
#include "superbsde/supconv.hpp"

using namespace superbsde;

namespace {

ProblemSpec affine_cubed() {
    ProblemSpec p;
    p.forward.T = 1.0;
    p.forward.x0 = 0.0;
    p.forward.sigma_c = 1.0;
    p.generator.family = GeneratorFamily::Kpz;
    p.generator.lambda = 1.0;
    p.generator.q = 3.0;
    p.terminal.family = TerminalFamily::Linear;
    p.terminal.scale = 2.0;
    p.growth.l = 2.0;
    p.growth.p_g = 0.9;
    p.growth.alpha_bar = 2.0;
    p.growth.C_growth = 8.0;
    return p;
}

void bm_simulate(benchmark::State& state) {
    ProblemSpec p = affine_cubed();
    TimeGrid grid{1.0, 50};
    int paths = static_cast<int>(state.range(0));
    for (auto _ : state) {
        PathEnsemble ens = simulate(p.forward, grid, paths, 7);
        benchmark::DoNotOptimize(ens.paths.data());
    }
    state.SetItemsProcessed(state.iterations() * paths * grid.N);
}
BENCHMARK(bm_simulate)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void bm_solve_pde(benchmark::State& state) {
    ProblemSpec p = affine_cubed();
    int nx = static_cast<int>(state.range(0));
    PdeConfig cfg = PdeConfig::auto_domain(p, nx, 5 * nx);
    for (auto _ : state) {
        ValueField f = solve_pde(p, cfg);
        benchmark::DoNotOptimize(f.u.data());
    }
    state.SetItemsProcessed(state.iterations() * nx * 5 * nx);
}
BENCHMARK(bm_solve_pde)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

void bm_solve_mc(benchmark::State& state) {
    ProblemSpec p = affine_cubed();
    int paths = static_cast<int>(state.range(0));
    TimeGrid grid{1.0, 50};
    PathEnsemble ens = simulate(p.forward, grid, paths, 7);
    RegressionBasis basis{40, 50};
    for (auto _ : state) {
        BackwardSolution sol = solve_mc(p, ens, basis);
        benchmark::DoNotOptimize(sol.y0);
    }
    state.SetItemsProcessed(state.iterations() * paths * grid.N);
}
BENCHMARK(bm_solve_mc)->Arg(20000)->Arg(100000)->Unit(benchmark::kMillisecond);

void bm_sup_convolve(benchmark::State& state) {
    TerminalSpec g;
    g.family = TerminalFamily::Step;
    g.low = 0.0;
    g.high = 1.0;
    g.at = 0.0;
    GrowthParams gr;
    gr.l = 1.5;
    gr.p_g = 0.0;
    gr.alpha_bar = 1.0;
    gr.C_growth = 1.0;
    SupConvConfig cfg;
    cfg.n = static_cast<double>(state.range(0));
    cfg.h_u = 1e-3;
    for (auto _ : state) {
        double acc = 0.0;
        for (double x = -2.0; x <= 2.0; x += 0.01)
            acc += sup_convolve(g, gr, cfg, x);
        benchmark::DoNotOptimize(acc);
    }
    state.SetItemsProcessed(state.iterations() * 401);
}
BENCHMARK(bm_sup_convolve)->Arg(2)->Arg(16)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
