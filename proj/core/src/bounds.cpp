#include "superbsde/bounds.hpp"
#include "superbsde/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace superbsde {

BoundParams BoundParams::from_growth(BoundKind kind, const GrowthParams& g, double T) {
    BoundParams bp;
    bp.kind = kind;
    bp.T = T;
    bp.l = g.l;
    bp.r_f = g.r_f;
    bp.r_g = g.r_g;
    bp.p_g = g.p_g;
    return bp;
}

namespace {

void require_kind(const BoundParams& bp, BoundKind want, const char* op) {
    if (bp.kind != want)
        throw KindError(std::string(op) + ": BoundParams has the wrong kind");
}

} // namespace

double z_bound_lipschitz(const BoundParams& bp, double t, double x) {
    require_kind(bp, BoundKind::ZLipschitz, "z_bound_lipschitz");
    return bp.A + bp.B * (pow_abs(x, bp.r_g) + (bp.T - t) * pow_abs(x, bp.r_f));
}

double y_bound(const BoundParams& bp, double t, double x) {
    require_kind(bp, BoundKind::YGrowth, "y_bound");
    return bp.C * (1.0 + pow_abs(x, bp.p_g) + (bp.T - t) * pow_abs(x, bp.r_f + 1.0));
}

double z_integral_bound(const BoundParams& bp, double t, double x) {
    require_kind(bp, BoundKind::ZIntegral, "z_integral_bound");
    return bp.C * (1.0 + pow_abs(x, bp.p_g) + (bp.T - t) * pow_abs(x, bp.r_f + 1.0));
}

double z_temporal_bound(const BoundParams& bp, double t, double x) {
    require_kind(bp, BoundKind::ZTemporal, "z_temporal_bound");
    if (t >= bp.T)
        throw TerminalTimeError("z_temporal_bound is only defined on [0,T)");
    double lp1 = bp.l + 1.0;
    return bp.C * (1.0 + pow_abs(x, bp.p_g / lp1)) / std::pow(bp.T - t, 1.0 / lp1)
         + bp.C * pow_abs(x, (bp.r_f + 1.0) / lp1);
}

double recursion_default_p(double l, double p_g) {
    return 1.0 / (1.0 - l * p_g / (l + 1.0));
}

RecursionResult recursion_fixed_point(const RecursionState& init, double tol, int max_iter) {
    const double al = init.a * init.l;
    if (al >= 1.0)
        throw ContractError("recursion requires a*l < 1, got a*l = " + std::to_string(al));
    if (!(tol > 0.0))
        throw ConfigError("recursion tol must be positive");

    RecursionResult res;
    double A = init.A_n, B = init.B_n, D = init.D_n;
    res.trace.push_back(A);
    for (int it = 0; it < max_iter; ++it) {
        double A_next = init.C_rec * (1.0 + pow_abs(A, al) + pow_abs(B, al * init.p)
                                      + pow_abs(D, al * init.p_bar));
        B = init.C_rec;
        D = init.C_rec;
        res.trace.push_back(A_next);
        res.iterations = it + 1;
        if (std::abs(A_next - A) <= tol) {
            res.A_inf = A_next;
            return res;
        }
        A = A_next;
    }
    throw IterationError("recursion did not converge within " + std::to_string(max_iter) +
                         " iterations; best A = " + std::to_string(res.trace.back()));
}

std::string assumption_name(Assumption a) {
    switch (a) {
    case Assumption::F1: return "F1";
    case Assumption::F2: return "F2";
    case Assumption::B1: return "B1";
    case Assumption::B2a: return "B2a";
    case Assumption::B2b: return "B2b";
    case Assumption::B2c: return "B2c";
    case Assumption::B3: return "B3";
    case Assumption::TC1: return "TC1";
    case Assumption::TC2: return "TC2";
    }
    return "?";
}

bool parse_assumption(const std::string& s, Assumption& out) {
    if (s == "F1") out = Assumption::F1;
    else if (s == "F2") out = Assumption::F2;
    else if (s == "B1") out = Assumption::B1;
    else if (s == "B2a") out = Assumption::B2a;
    else if (s == "B2b") out = Assumption::B2b;
    else if (s == "B2c") out = Assumption::B2c;
    else if (s == "B3") out = Assumption::B3;
    else if (s == "TC1") out = Assumption::TC1;
    else if (s == "TC2") out = Assumption::TC2;
    else return false;
    return true;
}

namespace {

struct Sampler {
    std::uint64_t state;
    explicit Sampler(std::uint64_t seed) : state(seed ? seed : 1) {}
    double uniform(double lo, double hi) {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z ^= z >> 31;
        double u = (static_cast<double>(z >> 11) + 0.5) * (1.0 / 9007199254740992.0);
        return lo + (hi - lo) * u;
    }
};

double grad_z(const ProblemSpec& p, double t, double x, double y, double z) {
    double h = 1e-5 * (1.0 + std::abs(z));
    double up = eval_generator(p, t, x, y, z + h);
    double dn = eval_generator(p, t, x, y, z - h);
    double g = (up - dn) / (2.0 * h);
    if (!std::isfinite(g))
        throw GradientError("non-finite z-gradient at z = " + std::to_string(z));
    return g;
}

struct MarginAccum {
    double worst = std::numeric_limits<double>::infinity();
    double w1[4] = {0, 0, 0, 0};
    double w2[4] = {0, 0, 0, 0};
    void offer(double m, double t, double x, double y, double z,
               double t2 = 0, double x2 = 0, double y2 = 0, double z2 = 0) {
        if (m < worst) {
            worst = m;
            w1[0] = t; w1[1] = x; w1[2] = y; w1[3] = z;
            w2[0] = t2; w2[1] = x2; w2[2] = y2; w2[3] = z2;
        }
    }
};

} // namespace

AssumptionReport check_assumption(const ProblemSpec& p, Assumption which,
                                  const SampleBox& box, long n_samples,
                                  std::uint64_t seed) {
    if (n_samples < 1000)
        throw ConfigError("check_assumption: n_samples must be >= 1000");
    const GrowthParams& gp = p.growth;
    const double C = gp.C_growth;
    Sampler rng(seed);
    MarginAccum acc;
    long excluded = 0;
    // Finite-difference checks carry discretization noise; exact-formula
    // checks only rounding.
    double tol = 1e-9;

    for (long s = 0; s < n_samples; ++s) {
        double t = rng.uniform(box.t_lo, box.t_hi);
        double x = rng.uniform(box.x_lo, box.x_hi);
        double y = rng.uniform(box.y_lo, box.y_hi);
        double z = rng.uniform(box.z_lo, box.z_hi);
        [[maybe_unused]] double t2 = rng.uniform(box.t_lo, box.t_hi);
        double x2 = rng.uniform(box.x_lo, box.x_hi);
        double y2 = rng.uniform(box.y_lo, box.y_hi);
        double z2 = rng.uniform(box.z_lo, box.z_hi);

        switch (which) {
        case Assumption::F1: {
            double m0 = C - std::abs(p.forward.drift(t, 0.0));
            double lhs = std::abs(p.forward.drift(t, x) - p.forward.drift(t, x2));
            double m1 = p.forward.K_b * std::abs(x - x2) - lhs;
            acc.offer(std::min(m0, m1), t, x, y, z, t, x2, y, z);
            tol = std::max(tol, 1e-9 * (1.0 + std::abs(lhs)));
            break;
        }
        case Assumption::F2: {
            double sig = p.forward.sigma(t);
            double hx = 1e-5 * (1.0 + std::abs(x));
            double dbdx = (p.forward.drift(t, x + hx) - p.forward.drift(t, x - hx)) / (2.0 * hx);
            double ht = 1e-5;
            double tlo = std::max(box.t_lo, t - ht), thi = std::min(box.t_hi, t + ht);
            double dsdt = thi > tlo ? (p.forward.sigma(thi) - p.forward.sigma(tlo)) / (thi - tlo) : 0.0;
            if (!std::isfinite(dbdx) || !std::isfinite(dsdt))
                throw GradientError("non-finite derivative in F2 check");
            double lhs = std::abs(sig * (sig * dbdx - dsdt));
            double m = p.forward.lambda_F2 * sig * sig - lhs;
            acc.offer(m, t, x, y, z);
            tol = std::max(tol, 1e-6 * (1.0 + std::abs(lhs)));
            break;
        }
        case Assumption::B1: {
            double delta = gp.delta.value_or(0.0);
            double gamma = gp.gamma.value_or(0.0);
            double beta = gp.beta.value_or(0.0);
            double ma = delta * std::abs(y - y2)
                      - std::abs(eval_generator(p, t, x, y, z) - eval_generator(p, t, x, y2, z));
            double mb = (C + 0.5 * gamma * (pow_abs(z, gp.l) + pow_abs(z2, gp.l))) * std::abs(z - z2)
                      - std::abs(eval_generator(p, t, x, y, z) - eval_generator(p, t, x, y, z2));
            double mc = (C + 0.5 * beta * (pow_abs(x, gp.r_f) + pow_abs(x2, gp.r_f))) * std::abs(x - x2)
                      - std::abs(eval_generator(p, t, x, y, z) - eval_generator(p, t, x2, y, z));
            acc.offer(std::min({ma, mb, mc}), t, x, y, z, t, x2, y2, z2);
            tol = std::max(tol, 1e-9 * (1.0 + pow_abs(z, gp.l + 1.0) + pow_abs(z2, gp.l + 1.0)));
            break;
        }
        case Assumption::B2a:
        case Assumption::B2b:
        case Assumption::B2c: {
            double f = eval_generator(p, t, x, y, z);
            double base = C + gp.beta_bar * pow_abs(x, gp.r_f + 1.0) + gp.delta_bar * std::abs(y);
            double upper = base + gp.gamma_bar * pow_abs(z, gp.l + 1.0) - f;
            double lower;
            if (which == Assumption::B2a)
                lower = upper + 2.0 * f; // |f| <= upper bound, symmetric
            else if (which == Assumption::B2b)
                lower = f + base + gp.gamma_bar * pow_abs(z, gp.eta);
            else
                lower = f + base - gp.epsilon * pow_abs(z, gp.l + 1.0);
            acc.offer(std::min(upper, lower), t, x, y, z);
            tol = std::max(tol, 1e-9 * (1.0 + std::abs(f) + base));
            break;
        }
        case Assumption::B3: {
            if (std::abs(z) < 1e-6) { ++excluded; continue; }  // kink guard
            double f = eval_generator(p, t, x, y, z);
            double gz = grad_z(p, t, x, y, z);
            double lhs = f - gz * z;
            double m = C - gp.epsilon * pow_abs(z, gp.l + 1.0) - lhs;
            acc.offer(m, t, x, y, z);
            tol = std::max(tol, 1e-5 * (1.0 + std::abs(lhs)));
            break;
        }
        case Assumption::TC1: {
            double alpha = gp.alpha.value_or(0.0);
            double lhs = std::abs(eval_terminal(p, x) - eval_terminal(p, x2));
            double m = (C + 0.5 * alpha * (pow_abs(x, gp.r_g) + pow_abs(x2, gp.r_g))) * std::abs(x - x2) - lhs;
            acc.offer(m, t, x, y, z, t, x2, y, z);
            tol = std::max(tol, 1e-9 * (1.0 + lhs));
            break;
        }
        case Assumption::TC2: {
            double lhs = std::abs(eval_terminal(p, x));
            double m = C + gp.alpha_bar * pow_abs(x, gp.p_g) - lhs;
            acc.offer(m, t, x, y, z);
            tol = std::max(tol, 1e-9 * (1.0 + lhs));
            break;
        }
        }
    }

    AssumptionReport rep;
    rep.which = which;
    rep.samples = n_samples;
    rep.excluded = excluded;
    rep.worst_margin = acc.worst;
    std::copy(acc.w1, acc.w1 + 4, rep.witness);
    std::copy(acc.w2, acc.w2 + 4, rep.witness2);
    rep.pass = acc.worst >= -tol;
    if (excluded > 0)
        rep.note = std::to_string(excluded) + " samples excluded near z-gradient kinks";
    return rep;
}

} // namespace superbsde
