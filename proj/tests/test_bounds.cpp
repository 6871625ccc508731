#include "doctest.h"

#include "superbsde/bounds.hpp"
#include "superbsde/errors.hpp"

#include <cmath>

using namespace superbsde;

TEST_CASE("bounds: recursion converges to the scalar root") {
    // A = 1 + A^{1/2} + B^{1/2} + D^{1/2} with B, D pinned to the same map:
    // limit solves A = 3 + sqrt(A)  =>  A_inf = (7 + sqrt(13)) / 2
    RecursionState s;
    s.C_rec = 1.0;
    s.a = 0.5;
    s.l = 1.0;
    s.p = 1.0;
    s.p_bar = 1.0;
    s.A_n = 1.0;
    s.B_n = 1.0;
    s.D_n = 1.0;
    RecursionResult r = recursion_fixed_point(s, 1e-12, 200);
    double root = (7.0 + std::sqrt(13.0)) / 2.0;
    CHECK(std::abs(r.A_inf - root) < 1e-9);
    CHECK(r.iterations <= 200);
    CHECK(r.trace.size() >= 2);
}

TEST_CASE("bounds: recursion rejects non-contracting exponents") {
    RecursionState s;
    s.C_rec = 1.0;
    s.a = 1.2;
    s.l = 1.0;
    s.p = 1.0;
    s.p_bar = 1.0;
    CHECK_THROWS_AS(recursion_fixed_point(s, 1e-10, 200), ContractError);
}

TEST_CASE("bounds: default recursion exponent") {
    // p = 1 / (1 - l p_g / (l+1))
    CHECK(recursion_default_p(2.0, 0.9) == doctest::Approx(1.0 / (1.0 - 2.0 * 0.9 / 3.0)));
    CHECK(recursion_default_p(2.0, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("bounds: envelope shapes and kind guard") {
    GrowthParams g;
    g.l = 2.0;
    g.p_g = 0.5;
    g.r_f = 0.2;
    g.r_g = 0.1;
    BoundParams y = BoundParams::from_growth(BoundKind::YGrowth, g, 1.0);
    y.C = 2.0;
    CHECK(y_bound(y, 0.0, 0.0) == doctest::Approx(2.0));
    CHECK(y_bound(y, 1.0, 3.0) ==
          doctest::Approx(2.0 * (1.0 + std::pow(3.0, 0.5))));
    CHECK(y_bound(y, 0.2, 2.0) > y_bound(y, 0.9, 2.0));   // shrinks toward T

    CHECK_THROWS_AS(z_bound_lipschitz(y, 0.0, 0.0), KindError);

    BoundParams zt = BoundParams::from_growth(BoundKind::ZTemporal, g, 1.0);
    zt.C = 1.0;
    CHECK(z_temporal_bound(zt, 0.5, 0.0) > 0.0);
    CHECK(z_temporal_bound(zt, 0.99, 0.0) > z_temporal_bound(zt, 0.5, 0.0));
    CHECK_THROWS_AS(z_temporal_bound(zt, 1.0, 0.0), TerminalTimeError);
}

namespace {

ProblemSpec cubic_driver() {
    ProblemSpec p;
    p.generator.family = GeneratorFamily::Kpz;
    p.generator.lambda = 1.0;
    p.generator.q = 3.0;
    p.terminal.family = TerminalFamily::Linear;
    p.terminal.scale = 2.0;
    p.growth.l = 2.0;
    p.growth.p_g = 0.9;
    p.growth.alpha_bar = 2.0;
    p.growth.C_growth = 1.0;
    p.growth.gamma_bar = 1.0;
    p.growth.epsilon = 1.0;
    p.growth.eta = 2.0;
    p.growth.gamma = 3.0;
    return p;
}

} // namespace

TEST_CASE("bounds: assumption checkers on the cubic driver") {
    ProblemSpec p = cubic_driver();
    SampleBox box;
    for (Assumption a : {Assumption::B1, Assumption::B2a, Assumption::B2b,
                         Assumption::B2c, Assumption::B3}) {
        AssumptionReport rep = check_assumption(p, a, box, 20000);
        INFO("assumption ", assumption_name(a), " margin ", rep.worst_margin);
        CHECK(rep.pass);
        CHECK(rep.samples > 0);
    }
}

TEST_CASE("bounds: declared-growth mismatch is flagged with a witness") {
    ProblemSpec p = cubic_driver();
    p.terminal.family = TerminalFamily::Custom;
    p.terminal.custom = Expr::parse("x*x");
    p.growth.p_g = 0.5;    // declares sqrt growth for a quadratic terminal
    SampleBox box;
    AssumptionReport rep = check_assumption(p, Assumption::TC2, box, 20000);
    CHECK_FALSE(rep.pass);
    CHECK(rep.worst_margin < 0.0);
    CHECK(std::abs(rep.witness[1]) > 1.0);   // violation found away from the origin
}

TEST_CASE("bounds: assumption name round-trip") {
    for (Assumption a : {Assumption::F1, Assumption::B1, Assumption::B2b,
                         Assumption::B3, Assumption::TC2}) {
        Assumption back;
        CHECK(parse_assumption(assumption_name(a), back));
        CHECK(back == a);
    }
    Assumption dummy;
    CHECK_FALSE(parse_assumption("NOPE", dummy));
}
