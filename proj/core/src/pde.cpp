#include "superbsde/pde.hpp"
#include "superbsde/errors.hpp"

#include <algorithm>
#include <cmath>

namespace superbsde {

PdeConfig PdeConfig::auto_domain(const ProblemSpec& p, int N_x, int N_t, double k) {
    // [x0 -+ (k sigma_max sqrt(T) + |b|_max T)]
    double sig_max = 0.0, b_max = 0.0;
    const int probes = 64;
    for (int i = 0; i <= probes; ++i) {
        double t = p.forward.T * i / probes;
        sig_max = std::max(sig_max, std::abs(p.forward.sigma(t)));
        b_max = std::max(b_max, std::abs(p.forward.drift(t, p.forward.x0)));
    }
    double half = k * sig_max * std::sqrt(p.forward.T) + b_max * p.forward.T;
    PdeConfig cfg;
    cfg.x_min = p.forward.x0 - half;
    cfg.x_max = p.forward.x0 + half;
    cfg.N_x = N_x;
    cfg.N_t = N_t;
    return cfg;
}

double ValueField::value(double t, double x) const {
    int k = static_cast<int>(std::lround(t / dt()));
    k = std::clamp(k, 0, N_t);
    double s = (x - x_min) / dx();
    int j = std::clamp(static_cast<int>(std::floor(s)), 0, N_x - 1);
    double w = std::clamp(s - j, 0.0, 1.0);
    return (1.0 - w) * at(k, j) + w * at(k, j + 1);
}

double ValueField::gradient(double t, double x) const {
    int k = static_cast<int>(std::lround(t / dt()));
    k = std::clamp(k, 0, N_t);
    double s = (x - x_min) / dx();
    int j = std::clamp(static_cast<int>(std::floor(s)), 0, N_x - 1);
    double w = std::clamp(s - j, 0.0, 1.0);
    return (1.0 - w) * grad_at(k, j) + w * grad_at(k, j + 1);
}

namespace {

void gradient_row(const std::vector<double>& u, size_t off, int n_nodes, double dx,
                  std::vector<double>& ux, size_t uoff) {
    ux[uoff] = (u[off + 1] - u[off]) / dx;
    for (int j = 1; j < n_nodes - 1; ++j)
        ux[uoff + j] = (u[off + j + 1] - u[off + j - 1]) / (2.0 * dx);
    ux[uoff + n_nodes - 1] = (u[off + n_nodes - 1] - u[off + n_nodes - 2]) / dx;
}

double fd_grad_z(const ProblemSpec& p, double t, double x, double z) {
    double h = 1e-5 * (1.0 + std::abs(z));
    return (eval_generator(p, t, x, 0.0, z + h) - eval_generator(p, t, x, 0.0, z - h)) / (2.0 * h);
}

void cfl_check(const ProblemSpec& p, const PdeConfig& cfg) {
    const double T = p.forward.T;
    const double dt = T / cfg.N_t;
    const double dx = (cfg.x_max - cfg.x_min) / cfg.N_x;

    double sig_max = 0.0;
    for (int i = 0; i <= 32; ++i)
        sig_max = std::max(sig_max, std::abs(p.forward.sigma(T * i / 32)));

    // gradient range the explicit nonlinearity will see
    double z_range = 0.0;
    if (cfg.gradient_clip) {
        double t_probe = std::max(0.0, T - 2.0 * dt);
        for (int j = 0; j <= cfg.N_x; ++j) {
            double x = cfg.x_min + j * dx;
            z_range = std::max(z_range, z_temporal_bound(*cfg.gradient_clip, t_probe, x));
        }
    } else {
        double g_prev = eval_terminal(p, cfg.x_min);
        double slope = 0.0;
        for (int j = 1; j <= cfg.N_x; ++j) {
            double g_cur = eval_terminal(p, cfg.x_min + j * dx);
            slope = std::max(slope, std::abs(g_cur - g_prev) / dx);
            g_prev = g_cur;
        }
        z_range = 1.5 * sig_max * slope;
    }

    double L_z = 0.0;
    for (int i = -8; i <= 8; ++i) {
        double z = z_range * i / 8.0;
        if (std::abs(z) < 1e-8) continue;
        L_z = std::max(L_z, std::abs(fd_grad_z(p, T, p.forward.x0, z)));
    }
    if (L_z > 0.0 && dt > 0.5 * dx / L_z)
        throw CflError("explicit nonlinearity violates the time-step restriction: dt = " +
                       std::to_string(dt) + " > 0.5 dx / L_z = " + std::to_string(0.5 * dx / L_z));
}

// tridiagonal Thomas solve, in place on rhs
void thomas(std::vector<double>& lower, std::vector<double>& diag,
            std::vector<double>& upper, std::vector<double>& rhs) {
    const size_t n = diag.size();
    for (size_t i = 1; i < n; ++i) {
        double w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (size_t i = n - 1; i-- > 0;)
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

} // namespace

ValueField solve_pde(const ProblemSpec& p, const PdeConfig& cfg) {
    if (cfg.N_x < 32)
        throw ConfigError("solve_pde: N_x must be >= 32");
    if (!(cfg.x_min < p.forward.x0 && p.forward.x0 < cfg.x_max))
        throw ConfigError("solve_pde: x0 must lie inside (x_min, x_max)");
    if (p.forward.dimension != 1)
        throw ConfigError("solve_pde: only dimension 1 is supported");
    if (!cfg.skip_cfl_check)
        cfl_check(p, cfg);

    ValueField f;
    f.T = p.forward.T;
    f.N_t = cfg.N_t;
    f.x_min = cfg.x_min;
    f.x_max = cfg.x_max;
    f.N_x = cfg.N_x;
    const int nn = f.nodes();
    f.u.assign(static_cast<size_t>(cfg.N_t + 1) * nn, 0.0);
    f.ux.assign(f.u.size(), 0.0);
    f.clipped.assign(f.u.size(), 0);

    const double dt = f.dt(), dx = f.dx();

    // terminal data
    for (int j = 0; j < nn; ++j)
        f.u[static_cast<size_t>(cfg.N_t) * nn + j] = eval_terminal(p, f.x_node(j));
    gradient_row(f.u, static_cast<size_t>(cfg.N_t) * nn, nn, dx, f.ux,
                 static_cast<size_t>(cfg.N_t) * nn);

    // blow-up guard calibrated from the terminal data and the driver size
    double C_term = 0.0, C_f = 0.0;
    for (int j = 0; j < nn; ++j) {
        double x = f.x_node(j);
        double shape_T = 1.0 + pow_abs(x, p.growth.p_g);
        C_term = std::max(C_term, std::abs(f.at(cfg.N_t, j)) / shape_T);
        C_f = std::max(C_f, std::abs(eval_generator(p, f.T, x, 0.0, 0.0)) /
                              (1.0 + pow_abs(x, p.growth.r_f + 1.0)));
    }
    const double C_guard = std::max(1.0, C_term) + f.T * C_f;

    std::vector<double> lower(nn - 2), diag(nn - 2), upper(nn - 2), rhs(nn - 2);

    for (int k = cfg.N_t - 1; k >= 0; --k) {
        const size_t prev = static_cast<size_t>(k + 1) * nn;
        const size_t cur = static_cast<size_t>(k) * nn;
        const double t_prev = f.t_knot(k + 1);
        const double t_cur = f.t_knot(k);
        const double sig_prev = p.forward.sigma(std::min(t_prev, f.T));
        const double sig_cur = p.forward.sigma(t_cur);
        const double a = 0.5 * sig_cur * sig_cur * dt / (dx * dx);
        // envelope time for clipping; the bound is undefined at t = T
        const double t_clip = std::min(t_prev, f.T - dt);

        for (int j = 1; j < nn - 1; ++j) {
            double x = f.x_node(j);
            double g = f.ux[prev + j];
            double z = sig_prev * g;
            if (cfg.gradient_clip) {
                double env = z_temporal_bound(*cfg.gradient_clip, t_clip, x);
                if (z > env) { z = env; ++f.clip_events; f.clipped[prev + j] = 1; }
                else if (z < -env) { z = -env; ++f.clip_events; f.clipped[prev + j] = 1; }
            }
            double expl = p.forward.drift(t_prev, x) * g
                        + eval_generator(p, t_prev, x, f.u[prev + j], z);
            rhs[j - 1] = f.u[prev + j] + dt * expl;
        }
        // linear-extrapolation boundary: the second difference vanishes at
        // the first and last interior nodes after substituting
        // u_0 = 2u_1 - u_2 and u_N = 2u_{N-1} - u_{N-2}
        for (int j = 0; j < nn - 2; ++j) {
            lower[j] = -a; diag[j] = 1.0 + 2.0 * a; upper[j] = -a;
        }
        diag[0] = 1.0; upper[0] = 0.0; lower[0] = 0.0;
        diag[nn - 3] = 1.0; lower[nn - 3] = 0.0; upper[nn - 3] = 0.0;
        thomas(lower, diag, upper, rhs);

        for (int j = 1; j < nn - 1; ++j)
            f.u[cur + j] = rhs[j - 1];
        f.u[cur] = 2.0 * f.u[cur + 1] - f.u[cur + 2];
        f.u[cur + nn - 1] = 2.0 * f.u[cur + nn - 2] - f.u[cur + nn - 3];
        gradient_row(f.u, cur, nn, dx, f.ux, cur);

        for (int j = 0; j < nn; ++j) {
            double x = f.x_node(j);
            double v = f.u[cur + j];
            double env = C_guard * (1.0 + pow_abs(x, p.growth.p_g) +
                                    (f.T - t_cur) * pow_abs(x, p.growth.r_f + 1.0));
            if (!std::isfinite(v) || std::abs(v) > 10.0 * env)
                throw BlowUpError("PDE solution exceeds 10x the growth envelope at (t = " +
                                  std::to_string(t_cur) + ", x = " + std::to_string(x) + ")");
        }
    }
    return f;
}

RateFit extract_rate_near_T(const ValueField& field, double window_lo, double window_hi,
                            std::optional<double> kink_x) {
    const double dt = field.dt(), dx = field.dx();
    std::vector<double> lx, ly;
    for (int k = 0; k <= field.N_t - 2; ++k) {
        double tau = field.T - field.t_knot(k);
        if (tau < window_lo || tau > window_hi) continue;
        double m = 0.0;
        for (int j = 2; j <= field.N_x - 2; ++j) {
            if (kink_x && std::abs(field.x_node(j) - *kink_x) <= dx) continue;
            m = std::max(m, std::abs(field.grad_at(k, j)));
        }
        if (m <= 0.0) continue;
        lx.push_back(std::log(tau));
        ly.push_back(std::log(m));
    }
    if (lx.size() < 8)
        throw FitError("extract_rate_near_T: only " + std::to_string(lx.size()) +
                       " samples in the window (need >= 8)");
    double n = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i]; sy += ly[i];
        sxx += lx[i] * lx[i]; sxy += lx[i] * ly[i]; syy += ly[i] * ly[i];
    }
    double vxx = sxx - sx * sx / n;
    double vxy = sxy - sx * sy / n;
    double vyy = syy - sy * sy / n;
    if (vxx <= 0.0)
        throw FitError("extract_rate_near_T: degenerate time window");
    RateFit fit;
    fit.exponent = vxy / vxx;
    // a flat gradient history (bounded Z) carries no power law to reject
    fit.r_squared = vyy > 1e-6 * n ? (vxy * vxy) / (vxx * vyy) : 1.0;
    fit.samples = static_cast<int>(lx.size());
    if (fit.r_squared < 0.9)
        throw FitError("extract_rate_near_T: R^2 = " + std::to_string(fit.r_squared) + " < 0.9");
    (void)dt;
    return fit;
}

} // namespace superbsde
