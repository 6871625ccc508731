#include "doctest.h"

#include "superbsde/errors.hpp"
#include "superbsde/pde.hpp"

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

} // namespace

TEST_CASE("pde: affine benchmark reproduces u = 2x + 8(T-t)") {
    ProblemSpec p = affine_cubed();
    PdeConfig cfg = PdeConfig::auto_domain(p, 400, 2000);
    ValueField f = solve_pde(p, cfg);
    CHECK(std::abs(f.value(0.0, 0.0) - 8.0) < 1e-3);
    CHECK(std::abs(f.value(0.5, 0.5) - (1.0 + 4.0)) < 1e-3);
    CHECK(std::abs(f.gradient(0.3, 0.0) - 2.0) < 1e-3);
}

TEST_CASE("pde: heat equation value x0^2 + sigma^2 T") {
    ProblemSpec p = affine_cubed();
    p.generator.lambda = 0.0;
    p.terminal.family = TerminalFamily::Custom;
    p.terminal.custom = Expr::parse("x*x");
    PdeConfig cfg = PdeConfig::auto_domain(p, 400, 2000);
    ValueField f = solve_pde(p, cfg);
    CHECK(std::abs(f.value(0.0, 0.0) - 1.0) < 1e-3);
}

TEST_CASE("pde: manufactured solution converges at first order in dt") {
    ProblemSpec p;
    p.forward.T = 1.0;
    p.forward.sigma_c = 1.0;
    p.generator.family = GeneratorFamily::Manufactured;
    p.generator.manu_sigma = 1.0;
    p.generator.manu_b = 0.0;
    p.generator.manu_l = 2.0;
    p.terminal.family = TerminalFamily::Custom;
    p.terminal.custom = Expr::parse("exp(-1)*sin(x)");
    p.growth.l = 2.0;

    auto max_err = [&](int nx, int nt) {
        PdeConfig cfg;
        cfg.x_min = -6.0;
        cfg.x_max = 6.0;
        cfg.N_x = nx;
        cfg.N_t = nt;
        ValueField f = solve_pde(p, cfg);
        double e = 0.0;
        for (int j = 0; j <= f.N_x; ++j) {
            double x = f.x_node(j);
            if (std::abs(x) > 3.0) continue;   // keep away from the artificial boundary
            e = std::max(e, std::abs(f.at(0, j) - manufactured_u(0.0, x)));
        }
        return e;
    };

    double e_dt1 = max_err(400, 100);
    double e_dt2 = max_err(400, 200);
    INFO("dt errors ", e_dt1, " ", e_dt2, " ratio ", e_dt1 / e_dt2);
    CHECK(e_dt1 / e_dt2 >= 1.7);   // first order in dt

    double e_dx1 = max_err(50, 4000);
    double e_dx2 = max_err(100, 4000);
    INFO("dx errors ", e_dx1, " ", e_dx2, " ratio ", e_dx1 / e_dx2);
    CHECK(e_dx1 / e_dx2 >= 3.0);   // second order in dx
}

TEST_CASE("pde: explicit nonlinearity enforces its time-step restriction") {
    ProblemSpec p = affine_cubed();
    p.terminal.family = TerminalFamily::Lipschitz;
    p.terminal.scale = 1.0;
    PdeConfig cfg = PdeConfig::auto_domain(p, 400, 50);
    CHECK_THROWS_AS(solve_pde(p, cfg), CflError);
    cfg = PdeConfig::auto_domain(p, 400, 2000);
    CHECK_NOTHROW(solve_pde(p, cfg));
}

TEST_CASE("pde: gradient blow-up rate near T for a sqrt terminal") {
    ProblemSpec p;
    p.forward.T = 1.0;
    p.forward.sigma_c = 1.0;
    p.generator.family = GeneratorFamily::Kpz;
    p.generator.lambda = 1.0;
    p.generator.q = 2.5;
    p.terminal.family = TerminalFamily::Power;
    p.terminal.exponent = 0.5;
    p.growth.l = 1.5;
    p.growth.p_g = 0.5;
    p.growth.alpha_bar = 1.0;
    p.growth.C_growth = 1.0;
    PdeConfig cfg = PdeConfig::auto_domain(p, 200, 2500);
    ValueField f = solve_pde(p, cfg);
    RateFit fit = extract_rate_near_T(f, 0.01, 0.25, 0.0);
    CHECK(fit.r_squared >= 0.9);
    CHECK(fit.exponent >= -0.55);
    CHECK(fit.exponent <= 0.0);
}

TEST_CASE("pde: config guards") {
    ProblemSpec p = affine_cubed();
    PdeConfig cfg = PdeConfig::auto_domain(p, 400, 2000);
    cfg.N_x = 16;
    CHECK_THROWS_AS(solve_pde(p, cfg), ConfigError);

    cfg = PdeConfig::auto_domain(p, 400, 2000);
    cfg.x_min = 1.0;   // x0 no longer interior
    CHECK_THROWS_AS(solve_pde(p, cfg), ConfigError);
}
