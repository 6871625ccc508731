#include "doctest.h"

#include "superbsde/errors.hpp"
#include "superbsde/supconv.hpp"

#include <cmath>

using namespace superbsde;

namespace {

TerminalSpec step01() {
    TerminalSpec g;
    g.family = TerminalFamily::Step;
    g.low = 0.0;
    g.high = 1.0;
    g.at = 0.0;
    return g;
}

GrowthParams bounded_growth() {
    GrowthParams gr;
    gr.l = 1.5;
    gr.p_g = 0.0;
    gr.alpha_bar = 1.0;
    gr.C_growth = 1.0;
    return gr;
}

} // namespace

TEST_CASE("supconv: smooth projection identity, saturation, slope") {
    SmoothProjection rho{5.0};
    for (double x : {-3.9, -1.0, 0.0, 2.5, 3.999})
        CHECK(smooth_project(rho, x) == doctest::Approx(x));
    for (double x = -12.0; x <= 12.0; x += 0.01)
        CHECK(std::abs(smooth_project(rho, x)) <= 5.0 + 1e-12);
    // sampled slope bound
    double prev = smooth_project(rho, -12.0);
    for (double x = -12.0 + 1e-3; x <= 12.0; x += 1e-3) {
        double cur = smooth_project(rho, x);
        CHECK(std::abs(cur - prev) / 1e-3 <= 1.0 + 1e-6);
        prev = cur;
    }
}

TEST_CASE("supconv: domination and step value") {
    TerminalSpec g = step01();
    GrowthParams gr = bounded_growth();
    SupConvConfig cfg;
    cfg.n = 1.0;
    cfg.h_u = 1e-3;

    // hat g_1(-0.25) = max(g(-0.25), 1 - 0.25) = 0.75
    SupConvResult r = sup_convolve_full(g, gr, cfg, -0.25);
    CHECK(r.value == doctest::Approx(0.75).epsilon(1e-6));
    CHECK(r.certified_gap > 0.0);

    for (double x : {-2.0, -0.5, 0.0, 0.3, 1.5})
        CHECK(sup_convolve(g, gr, cfg, x) >= eval_terminal(g, x) - 1e-12);
}

TEST_CASE("supconv: n-Lipschitz bound and monotonicity in n") {
    TerminalSpec g = step01();
    GrowthParams gr = bounded_growth();

    SupConvConfig c2;
    c2.n = 2.0;
    c2.h_u = 1e-3;
    SupConvConfig c8 = c2;
    c8.n = 8.0;

    double prev_x = -2.0;
    double prev_v = sup_convolve(g, gr, c2, prev_x);
    double gap = (2.0 + 1.0) * c2.h_u;   // slack for the grid approximation
    for (double x = -2.0 + 0.05; x <= 2.0; x += 0.05) {
        double v = sup_convolve(g, gr, c2, x);
        CHECK(std::abs(v - prev_v) <= 2.0 * 0.05 + 2.0 * gap);
        // decreasing in n pointwise
        CHECK(sup_convolve(g, gr, c8, x) <= v + 2.0 * gap);
        prev_x = x;
        prev_v = v;
    }
}

TEST_CASE("supconv: Lipschitz terminal is a fixed point for n >= L") {
    TerminalSpec g;
    g.family = TerminalFamily::Lipschitz;   // |x|, Lipschitz constant 1
    g.scale = 1.0;
    GrowthParams gr;
    gr.l = 2.0;
    gr.p_g = 0.9;
    gr.alpha_bar = 1.0;
    gr.C_growth = 1.0;
    SupConvConfig cfg;
    cfg.n = 3.0;
    cfg.h_u = 1e-3;
    for (double x : {-1.5, -0.2, 0.0, 0.4, 1.5}) {
        SupConvResult r = sup_convolve_full(g, gr, cfg, x);
        CHECK(std::abs(r.value - std::abs(x)) <= r.certified_gap + 1e-9);
    }
}

TEST_CASE("supconv: admissibility threshold and guards") {
    TerminalSpec g = step01();
    GrowthParams gr = bounded_growth();
    double n0 = admissible_n0(g, gr, -10.0, 10.0);
    CHECK(n0 >= 1.0);

    GrowthParams super = gr;
    super.p_g = 1.0;   // not sublinear: no finite bracketing radius
    CHECK_THROWS_AS(admissible_n0(g, super, -10.0, 10.0), GrowthError);

    SupConvConfig bad;
    bad.n = 2.0;
    bad.h_u = 1e9;     // grid step larger than the bracketing radius
    CHECK_THROWS_AS(sup_convolve(g, gr, bad, 0.0), ConfigError);
}
