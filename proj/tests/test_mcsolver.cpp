#include "doctest.h"

#include "superbsde/errors.hpp"
#include "superbsde/mcsolver.hpp"

#include <cmath>

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

PathEnsemble ens_for(const ProblemSpec& p, int paths, int steps, std::uint64_t seed) {
    TimeGrid grid{p.forward.T, steps};
    return simulate(p.forward, grid, paths, seed);
}

} // namespace

TEST_CASE("mcsolver: affine benchmark is reproduced to near machine precision") {
    ProblemSpec p = affine_cubed();
    PathEnsemble ens = ens_for(p, 20000, 25, 17);
    BackwardSolution sol = solve_mc(p, ens, RegressionBasis{20, 50});
    CHECK(std::abs(sol.y0 - 8.0) < 1e-9);
    CHECK(sol.y0_se < 1e-9);
    // terminal values are evaluated pathwise and exactly
    for (int j = 0; j < 100; ++j)
        CHECK(sol.y(ens.grid.N, j) == doctest::Approx(2.0 * ens.x(j, ens.grid.N)));
}

TEST_CASE("mcsolver: heat case matches x0^2 + sigma^2 T") {
    ProblemSpec p = affine_cubed();
    p.generator.lambda = 0.0;
    p.terminal.family = TerminalFamily::Custom;
    p.terminal.custom = Expr::parse("x*x");
    p.growth.p_g = 1.6;
    p.growth.l = 1.5;
    PathEnsemble ens = ens_for(p, 20000, 25, 17);
    BackwardSolution sol = solve_mc(p, ens, RegressionBasis{20, 50});
    CHECK(std::abs(sol.y0 - 1.0) <= std::max(0.05, 3.0 * sol.y0_se));
}

TEST_CASE("mcsolver: identical inputs give bitwise-identical results") {
    ProblemSpec p = affine_cubed();
    PathEnsemble ens = ens_for(p, 5000, 20, 23);
    BackwardSolution a = solve_mc(p, ens, RegressionBasis{10, 50});
    BackwardSolution b = solve_mc(p, ens, RegressionBasis{10, 50});
    CHECK(a.y0 == b.y0);
    CHECK(a.Y == b.Y);
    CHECK(a.Z == b.Z);
}

TEST_CASE("mcsolver: basis guards") {
    ProblemSpec p = affine_cubed();
    PathEnsemble ens = ens_for(p, 1000, 10, 5);
    CHECK_THROWS_AS(solve_mc(p, ens, RegressionBasis{1, 50}), ConfigError);
    // 1000 paths over 40 bins leaves 25 per bin, below the floor of 50
    CHECK_THROWS_AS(solve_mc(p, ens, RegressionBasis{40, 50}), OccupancyError);
}

TEST_CASE("mcsolver: terminal continuity probe on the heat case") {
    ProblemSpec p = affine_cubed();
    p.generator.lambda = 0.0;
    p.terminal.family = TerminalFamily::Custom;
    p.terminal.custom = Expr::parse("x*x");
    p.growth.p_g = 1.6;
    p.growth.l = 1.5;
    PathEnsemble ens = ens_for(p, 20000, 50, 13);
    ContinuityProbeReport rep = terminal_continuity_probe(
        p, ens, RegressionBasis{20, 50}, {0.5, 0.75, 0.9, 0.96, 0.98});
    REQUIRE(rep.gaps.size() == 5);
    CHECK(rep.monotone_tail);
    CHECK(rep.fit_ok);
    CHECK(rep.fitted_decay > 0.0);   // gap shrinks as T' approaches T
}
