#include "doctest.h"

#include "superbsde/forward.hpp"

#include <cmath>
#include <cstdio>

using namespace superbsde;

namespace {

ForwardModel brownian() {
    ForwardModel m;
    m.T = 1.0;
    m.x0 = 0.0;
    m.sigma_c = 1.0;
    return m;
}

} // namespace

TEST_CASE("forward: identical seeds give identical ensembles") {
    TimeGrid grid{1.0, 20};
    PathEnsemble a = simulate(brownian(), grid, 500, 42);
    PathEnsemble b = simulate(brownian(), grid, 500, 42);
    CHECK(a.paths == b.paths);
    CHECK(a.increments == b.increments);

    PathEnsemble c = simulate(brownian(), grid, 500, 43);
    CHECK(a.paths != c.paths);
}

TEST_CASE("forward: per-path substreams are independent of ensemble size") {
    TimeGrid grid{1.0, 10};
    PathEnsemble small = simulate(brownian(), grid, 8, 7);
    PathEnsemble big = simulate(brownian(), grid, 64, 7);
    for (int k = 0; k <= grid.N; ++k)
        CHECK(small.x(5, k) == big.x(5, k));
}

TEST_CASE("forward: Euler recursion matches stored increments") {
    ForwardModel m = brownian();
    m.drift_kind = DriftKind::Linear;
    m.drift_c0 = 0.1;
    m.drift_slope = -0.5;
    m.sigma_c = 0.7;
    TimeGrid grid{1.0, 25};
    PathEnsemble ens = simulate(m, grid, 20, 3);
    double dt = grid.dt();
    for (int j = 0; j < ens.n_paths; ++j)
        for (int i = 0; i < grid.N; ++i) {
            double pred = ens.x(j, i) + m.drift(grid.knot(i), ens.x(j, i)) * dt +
                          m.sigma(grid.knot(i)) * ens.dw(j, i);
            CHECK(ens.x(j, i + 1) == doctest::Approx(pred).epsilon(1e-12));
        }
}

TEST_CASE("forward: terminal moments of Brownian motion") {
    TimeGrid grid{1.0, 50};
    PathEnsemble ens = simulate(brownian(), grid, 20000, 9);
    double m1 = 0, m2 = 0;
    for (int j = 0; j < ens.n_paths; ++j) {
        double v = ens.x(j, grid.N);
        m1 += v;
        m2 += v * v;
    }
    m1 /= ens.n_paths;
    m2 /= ens.n_paths;
    CHECK(std::abs(m1) < 0.03);
    CHECK(m2 == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("forward: ensemble cache round-trips") {
    TimeGrid grid{0.5, 8};
    PathEnsemble ens = simulate(brownian(), grid, 30, 11);
    std::string path = "unit_ensemble_cache.bin";
    save_ensemble(ens, path);
    PathEnsemble back = load_ensemble(path);
    CHECK(back.n_paths == ens.n_paths);
    CHECK(back.grid.N == ens.grid.N);
    CHECK(back.paths == ens.paths);
    CHECK(back.increments == ens.increments);
    std::remove(path.c_str());
}

TEST_CASE("forward: conditional moment diagnostic is sane") {
    TimeGrid grid{1.0, 20};
    PathEnsemble ens = simulate(brownian(), grid, 2000, 5);
    MomentCheckReport rep = conditional_moment_check(ens, 2.0, 10, 50);
    CHECK(rep.bins == 10);
    CHECK(rep.fitted_C > 0.0);
    CHECK(rep.max_bin_ratio > 0.0);
}
