#include "superbsde/supconv.hpp"
#include "superbsde/errors.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace superbsde {

double smooth_project(const SmoothProjection& rho, double x) {
    const double M = rho.M;
    if (M < 2.0)
        throw ConfigError("smooth projection requires M >= 2");
    double a = std::abs(x);
    if (a <= M - 1.0) return x;
    double s = x >= 0.0 ? 1.0 : -1.0;
    if (a >= M + 1.0) return s * M;
    // cubic Hermite from (M-1, M-1, slope 1) to (M+1, M, slope 0); the
    // radial slope is (1-t)/1 in [0,1], so |d rho/dx| <= 1 on the transition
    double t = (a - (M - 1.0)) / 2.0;
    double h = (2 * t * t * t - 3 * t * t + 1) * (M - 1.0)
             + (t * t * t - 2 * t * t + t) * 2.0
             + (-2 * t * t * t + 3 * t * t) * M;
    return s * h;
}

namespace {

double envelope(const GrowthParams& gp, double u) {
    return gp.C_growth + gp.alpha_bar * pow_abs(u, gp.p_g);
}

// Bracketing radius for the candidate grid.  For p_g < 1 the sup decays at
// rate n beyond the envelope crossing; for p_g == 1 the effective decay
// rate is n - alpha_bar and the envelope must be strictly sub-n.
double bracket_radius(const GrowthParams& gp, double n, double x, double factor) {
    if (gp.p_g > 1.0)
        throw GrowthError("sup-convolution needs a sublinear terminal growth (p_g <= 1), got p_g = " +
                          std::to_string(gp.p_g));
    double denom = n;
    if (gp.p_g >= 1.0) {
        denom = n - gp.alpha_bar;
        if (denom <= 0.0)
            throw GrowthError("sup-convolution with p_g = 1 needs n > alpha_bar");
    }
    double r0 = 0.0;
    double r = 0.0;
    for (int it = 0; it < 2; ++it) {
        r = (2.0 * gp.C_growth + 2.0 * gp.alpha_bar * std::pow(std::max(1.0, std::abs(x)) + r0, gp.p_g)) / denom + 1.0;
        r0 = r;
    }
    return r * factor;
}

} // namespace

double admissible_n0(const TerminalSpec& /*g*/, const GrowthParams& growth,
                     double box_lo, double box_hi) {
    if (growth.p_g >= 1.0)
        throw GrowthError("admissible_n0 requires p_g < 1");
    const int cells = 4096;
    double h = (box_hi - box_lo) / cells;
    double worst = 0.0;
    double prev = envelope(growth, box_lo);
    for (int i = 1; i <= cells; ++i) {
        double cur = envelope(growth, box_lo + i * h);
        worst = std::max(worst, std::abs(cur - prev) / h);
        prev = cur;
    }
    return worst + 1.0;
}

SupConvResult sup_convolve_full(const TerminalSpec& g, const GrowthParams& growth,
                                const SupConvConfig& cfg, double x) {
    const double n = cfg.n;
    double R = bracket_radius(growth, n, x, cfg.search_radius_factor);
    if (cfg.h_u >= R)
        throw ConfigError("supconv grid step h_u must be smaller than the search radius");
    if (cfg.h_u <= 0.0)
        throw ConfigError("supconv h_u must be positive");

    const long k_max = static_cast<long>(std::ceil(2.0 * R / cfg.h_u));
    std::vector<double> gu(static_cast<size_t>(k_max) + 1);
    double best = eval_terminal(g, x);   // candidate u = x guarantees domination
    double best_u = x;
    const double env_tol = 1e-9;
    for (long k = 0; k <= k_max; ++k) {
        double u = (x - R) + k * cfg.h_u;
        double val = eval_terminal(g, u);
        if (std::abs(val) > envelope(growth, u) + env_tol)
            throw GrowthError("terminal condition violates its declared growth envelope at u = " +
                              std::to_string(u));
        gu[static_cast<size_t>(k)] = val;
        double cand = val - n * std::abs(x - u);
        if (cand > best) { best = cand; best_u = u; }
    }

    // local slope bound around the argmax cell
    long k_star = static_cast<long>(std::llround((best_u - (x - R)) / cfg.h_u));
    double L_loc = 0.0;
    for (long k = std::max(0L, k_star - 1); k < std::min(k_max, k_star + 1); ++k)
        L_loc = std::max(L_loc, std::abs(gu[static_cast<size_t>(k + 1)] - gu[static_cast<size_t>(k)]) / cfg.h_u);

    if (cfg.refine) {
        // one golden-section pass in the best cell
        double lo = best_u - cfg.h_u, hi = best_u + cfg.h_u;
        auto F = [&](double u) { return eval_terminal(g, u) - n * std::abs(x - u); };
        const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
        double a = lo, b = hi;
        double c = b - phi * (b - a), d = a + phi * (b - a);
        double fc = F(c), fd = F(d);
        for (int it = 0; it < 40; ++it) {
            if (fc >= fd) { b = d; d = c; fd = fc; c = b - phi * (b - a); fc = F(c); }
            else { a = c; c = d; fc = fd; d = a + phi * (b - a); fd = F(d); }
        }
        double u_ref = fc >= fd ? c : d;
        double f_ref = std::max(fc, fd);
        if (f_ref > best) { best = f_ref; best_u = u_ref; }
    }

    SupConvResult out;
    out.value = best;
    out.certified_gap = (n + L_loc) * cfg.h_u / 2.0;
    out.radius = R;
    out.argmax_u = best_u;
    return out;
}

double sup_convolve(const TerminalSpec& g, const GrowthParams& growth,
                    const SupConvConfig& cfg, double x) {
    return sup_convolve_full(g, growth, cfg, x).value;
}

} // namespace superbsde
