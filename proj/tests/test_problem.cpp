#include "doctest.h"

#include "superbsde/errors.hpp"
#include "superbsde/problem.hpp"

#include <cmath>

using namespace superbsde;

namespace {

ProblemSpec kpz_cubed() {
    ProblemSpec p;
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

} // namespace

TEST_CASE("problem: pow_abs conventions") {
    CHECK(pow_abs(0.0, 0.0) == doctest::Approx(1.0));
    CHECK(pow_abs(0.0, 2.0) == doctest::Approx(0.0));
    CHECK(pow_abs(-3.0, 2.0) == doctest::Approx(9.0));
    CHECK(pow_abs(-8.0, 1.0 / 3.0) == doctest::Approx(2.0));
}

TEST_CASE("problem: terminal families") {
    TerminalSpec g;

    g.family = TerminalFamily::Linear;
    g.scale = 2.0;
    CHECK(eval_terminal(g, 1.5) == doctest::Approx(3.0));

    g.family = TerminalFamily::Lipschitz;
    g.scale = 1.0;
    g.offset = 0.5;
    CHECK(eval_terminal(g, -2.0) == doctest::Approx(2.5));

    g.family = TerminalFamily::Power;
    g.scale = 1.0;
    g.exponent = 0.5;
    CHECK(eval_terminal(g, 4.0) == doctest::Approx(2.0));

    g.family = TerminalFamily::Step;
    g.low = 0.0;
    g.high = 1.0;
    g.at = 0.0;
    CHECK(eval_terminal(g, -0.1) == doctest::Approx(0.0));
    CHECK(eval_terminal(g, 0.1) == doctest::Approx(1.0));
    // upper value at the jump itself
    CHECK(eval_terminal(g, 0.0) == doctest::Approx(1.0));

    g.family = TerminalFamily::Tabulated;
    g.tab_x = {0.0, 1.0, 2.0};
    g.tab_v = {0.0, 2.0, 2.0};
    CHECK(eval_terminal(g, 0.5) == doctest::Approx(1.0));
    CHECK(eval_terminal(g, 1.5) == doctest::Approx(2.0));

    g = TerminalSpec{};
    g.family = TerminalFamily::Custom;
    g.custom = Expr::parse("x*x");
    CHECK(eval_terminal(g, 3.0) == doctest::Approx(9.0));
}

TEST_CASE("problem: kpz and power generators") {
    ProblemSpec p = kpz_cubed();
    CHECK(eval_generator(p, 0.0, 0.0, 0.0, 2.0) == doctest::Approx(8.0));
    CHECK(eval_generator(p, 0.0, 0.0, 0.0, -2.0) == doctest::Approx(8.0));

    ProblemSpec q;
    q.generator.family = GeneratorFamily::Power;
    q.generator.c0 = 1.0;
    q.generator.c_x = 2.0;
    q.generator.c_y = 3.0;
    q.generator.c_z = 1.0;
    q.generator.q = 2.5;
    q.growth.l = 1.5;
    q.growth.r_f = 0.5;
    // f = c0 + c_x |x|^{r_f+1} + c_y y + c_z |z|^q
    double want = 1.0 + 2.0 * std::pow(2.0, 1.5) + 3.0 * 0.5 + std::pow(2.0, 2.5);
    CHECK(eval_generator(q, 0.0, 2.0, 0.5, 2.0) == doctest::Approx(want));
}

TEST_CASE("problem: manufactured family has zero PDE residual for u*") {
    ProblemSpec p;
    p.generator.family = GeneratorFamily::Manufactured;
    p.generator.manu_sigma = 1.0;
    p.generator.manu_b = 0.0;
    p.generator.manu_l = 2.0;
    p.growth.l = 2.0;

    // residual -u*_t - 0.5 sigma^2 u*_xx - b u*_x - f(t,x,u*,sigma u*_x) at
    // sample points, with derivatives taken analytically for u* = e^{-t} sin x
    for (double t : {0.1, 0.5, 0.9}) {
        for (double x : {-1.0, 0.0, 0.7, 2.0}) {
            double u = manufactured_u(t, x);
            double ux = manufactured_ux(t, x);
            double ut = -std::exp(-t) * std::sin(x);
            double uxx = -std::exp(-t) * std::sin(x);
            double f = eval_generator(p, t, x, u, 1.0 * ux);
            double resid = -ut - 0.5 * uxx - f;
            CHECK(std::abs(resid) < 1e-10);
        }
    }
}

TEST_CASE("problem: validation gates") {
    ProblemSpec p = kpz_cubed();
    CHECK_NOTHROW(p.validate());

    ProblemSpec bad = p;
    bad.growth.l = 1.0;                         // superquadratic exponent must exceed 1
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = p;
    bad.generator.q = 2.0;                      // kpz requires q > 2
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = p;
    bad.growth.p_g = 1.6;                       // p_g must stay below 1 + 1/l
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = p;
    bad.terminal.family = TerminalFamily::Power;
    bad.terminal.exponent = 0.3;                // must match growth.p_g
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("problem: supconv gate requires p_g * l < 1") {
    GrowthParams g;
    g.l = 2.0;
    g.p_g = 0.9;
    CHECK_NOTHROW(g.validate());
    CHECK_THROWS_AS(g.validate_supconv(), ConfigError);
    g.p_g = 0.4;
    CHECK_NOTHROW(g.validate_supconv());
}
