#include "superbsde/mcsolver.hpp"
#include "superbsde/errors.hpp"
#include "superbsde/forward.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace superbsde {

double BackwardSolution::total_clip_fraction() const {
    if (clip_fraction.empty()) return 0.0;
    double s = std::accumulate(clip_fraction.begin(), clip_fraction.end(), 0.0);
    return s / static_cast<double>(clip_fraction.size());
}

namespace {

// Dense linear operator mapping bin-node values y to a smoothed spatial
// derivative: a local quadratic-fit derivative (edge rows pinned to the
// nearest interior stencil) followed by least-squares projection onto a
// low-degree polynomial.  Linearity gives the backward step an exact
// Jacobian, and the projection suppresses high-frequency regression noise
// that the gradient map would otherwise amplify.
struct GradOp {
    int nb = 0;
    std::vector<std::vector<double>> F;

    void build(const std::vector<double>& xc, int nb_, int hw, int deg) {
        nb = nb_;
        std::vector<std::vector<double>> Dm(nb, std::vector<double>(nb, 0.0));
        auto fit_row = [&](int b, int l, int h) {
            int m = h - l + 1;
            double s0 = m, s1 = 0, s2 = 0, s3 = 0, s4 = 0;
            std::vector<double> u(m);
            for (int c = 0; c < m; ++c) {
                u[c] = xc[l + c] - xc[b];
                s1 += u[c]; s2 += u[c] * u[c];
                s3 += u[c] * u[c] * u[c]; s4 += u[c] * u[c] * u[c] * u[c];
            }
            double A[3][3] = {{s0, s1, s2}, {s1, s2, s3}, {s2, s3, s4}};
            double rhs[3] = {0, 1, 0};
            for (int r = 0; r < 3; ++r) {
                int pv = r;
                for (int k = r + 1; k < 3; ++k)
                    if (std::abs(A[k][r]) > std::abs(A[pv][r])) pv = k;
                for (int c = 0; c < 3; ++c) std::swap(A[r][c], A[pv][c]);
                std::swap(rhs[r], rhs[pv]);
                for (int k = r + 1; k < 3; ++k) {
                    double f = A[k][r] / A[r][r];
                    for (int c = r; c < 3; ++c) A[k][c] -= f * A[r][c];
                    rhs[k] -= f * rhs[r];
                }
            }
            double v2 = rhs[2] / A[2][2];
            double v1 = (rhs[1] - A[1][2] * v2) / A[1][1];
            double v0 = (rhs[0] - A[0][1] * v1 - A[0][2] * v2) / A[0][0];
            for (int c = 0; c < m; ++c) Dm[b][l + c] = v0 + v1 * u[c] + v2 * u[c] * u[c];
        };
        int blo = std::min(hw, nb - 1), bhi = std::max(nb - 1 - hw, 0);
        for (int b = 0; b < nb; ++b) {
            int bb = std::clamp(b, blo, bhi);
            int l = std::max(0, bb - hw), h = std::min(nb - 1, bb + hw);
            if (h - l + 1 < 3) { Dm[b][b] = 0.0; continue; }
            fit_row(bb, l, h);
            if (b != bb) Dm[b] = Dm[bb];
        }
        if (deg < 0 || deg + 1 >= nb) { F = std::move(Dm); return; }

        // projection P = V (V^T V)^{-1} V^T on scaled monomials
        double mn = xc[0], mx = xc[nb - 1];
        double xb = 0.5 * (mn + mx), xs = std::max(0.5 * (mx - mn), 1e-12);
        int m = deg + 1;
        std::vector<std::vector<double>> V(nb, std::vector<double>(m));
        for (int b = 0; b < nb; ++b) {
            double u = (xc[b] - xb) / xs, pw = 1.0;
            for (int d = 0; d < m; ++d) { V[b][d] = pw; pw *= u; }
        }
        std::vector<std::vector<double>> G(m, std::vector<double>(m, 0.0));
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c) {
                double s = 0;
                for (int b = 0; b < nb; ++b) s += V[b][r] * V[b][c];
                G[r][c] = s;
            }
        std::vector<std::vector<double>> Gi(m, std::vector<double>(m, 0.0));
        for (int d = 0; d < m; ++d) Gi[d][d] = 1.0;
        for (int r = 0; r < m; ++r) {
            int pv = r;
            for (int k = r + 1; k < m; ++k)
                if (std::abs(G[k][r]) > std::abs(G[pv][r])) pv = k;
            std::swap(G[r], G[pv]); std::swap(Gi[r], Gi[pv]);
            double dg = G[r][r];
            for (int c = 0; c < m; ++c) { G[r][c] /= dg; Gi[r][c] /= dg; }
            for (int k = 0; k < m; ++k) {
                if (k == r) continue;
                double f = G[k][r];
                for (int c = 0; c < m; ++c) { G[k][c] -= f * G[r][c]; Gi[k][c] -= f * Gi[r][c]; }
            }
        }
        std::vector<std::vector<double>> VG(nb, std::vector<double>(m, 0.0));
        for (int b = 0; b < nb; ++b)
            for (int d = 0; d < m; ++d) {
                double s = 0;
                for (int e = 0; e < m; ++e) s += V[b][e] * Gi[e][d];
                VG[b][d] = s;
            }
        std::vector<std::vector<double>> VtD(m, std::vector<double>(nb, 0.0));
        for (int d = 0; d < m; ++d)
            for (int c = 0; c < nb; ++c) {
                double s = 0;
                for (int b = 0; b < nb; ++b) s += V[b][d] * Dm[b][c];
                VtD[d][c] = s;
            }
        F.assign(nb, std::vector<double>(nb, 0.0));
        for (int b = 0; b < nb; ++b)
            for (int c = 0; c < nb; ++c) {
                double s = 0;
                for (int d = 0; d < m; ++d) s += VG[b][d] * VtD[d][c];
                F[b][c] = s;
            }
    }

    void apply(const std::vector<double>& y, std::vector<double>& out) const {
        out.assign(nb, 0.0);
        for (int b = 0; b < nb; ++b) {
            double s = 0;
            for (int c = 0; c < nb; ++c) s += F[b][c] * y[c];
            out[b] = s;
        }
    }
};

// piecewise-linear value profile with sloped linear tails
struct Profile {
    std::vector<double> x, y;
    double slo = 0.0, shi = 0.0;
    bool ready = false;

    double eval(double v) const {
        int nb = static_cast<int>(x.size());
        if (nb == 1) return y[0] + (v > x[0] ? shi : slo) * (v - x[0]);
        if (v <= x[0]) return y[0] + slo * (v - x[0]);
        if (v >= x[nb - 1]) return y[nb - 1] + shi * (v - x[nb - 1]);
        int lo = 0, hi = nb - 1;
        while (hi - lo > 1) { int mid = (lo + hi) / 2; (x[mid] <= v ? lo : hi) = mid; }
        double w = (v - x[lo]) / (x[hi] - x[lo]);
        return (1.0 - w) * y[lo] + w * y[hi];
    }
};

double interp_at(const std::vector<double>& xs, const std::vector<double>& ys, double v) {
    int nb = static_cast<int>(xs.size());
    if (nb == 1 || v <= xs[0]) return ys[0];
    if (v >= xs[nb - 1]) return ys[nb - 1];
    int lo = 0, hi = nb - 1;
    while (hi - lo > 1) { int mid = (lo + hi) / 2; (xs[mid] <= v ? lo : hi) = mid; }
    double w = (v - xs[lo]) / (xs[hi] - xs[lo]);
    return (1.0 - w) * ys[lo] + w * ys[hi];
}

// solver tuning; validated against closed-form and finite-difference references
constexpr int kStencilHalfWidth = 4;      // local quadratic-fit window
constexpr int kProjectionDegree = -1;     // polynomial smoothing of the gradient
constexpr double kGradientBlend = 0.5;    // blend of current vs previous-step gradient
constexpr int kNewtonMaxIter = 30;
constexpr double kNewtonTol = 1e-11;

// Near T the expected driver magnitude can blow up like an integrable power
// of T-t when the terminal gradient is steep, so a left-endpoint rule on the
// caller's uniform grid undercounts the final interval.  The backward pass
// therefore subdivides the last interval into geometrically shrinking
// substeps toward T (Brownian-bridge splits of the final increment).
constexpr int kTailSubsteps = 8;
constexpr double kTailRatio = 0.5;

} // namespace

BackwardSolution solve_mc(const ProblemSpec& p, const PathEnsemble& ens,
                          const RegressionBasis& basis,
                          const std::optional<BoundParams>& trunc) {
    if (basis.bins < 2)
        throw ConfigError("solve_mc: basis.bins must be >= 2");
    const int n = ens.n_paths;
    const int N = ens.grid.N;
    const double dt = ens.grid.dt();
    const double T = ens.grid.T;
    const int NB = basis.bins;

    BackwardSolution sol;
    sol.grid = ens.grid;
    sol.n_paths = n;
    sol.truncation = trunc;
    sol.Y.assign(static_cast<size_t>(N + 1) * n, 0.0);
    sol.Z.assign(static_cast<size_t>(N) * n, 0.0);
    sol.clip_fraction.assign(N, 0.0);
    sol.regression_residual.assign(N, 0.0);

    // Working copy of the driving noise: the second half of the paths is
    // replaced by the antithetic mirror of the first half and each step is
    // rescaled to its exact increment variance.  This removes the odd-moment
    // and variance components of the frozen path cloud's sampling error,
    // which otherwise act as a correlated forcing on every backward step.
    // refined internal time grid: uniform up to T-dt, then geometric toward T
    const int msub = std::max(1, kTailSubsteps);
    const int M = (N - 1) + msub;
    std::vector<double> tk(M + 1), dtk(M);
    {
        for (int i = 0; i < N; ++i) tk[i] = ens.grid.knot(i);
        for (int i = 0; i + 1 < N; ++i) dtk[i] = dt;
        double wsum = 0.0, w = 1.0;
        for (int j = 0; j < msub; ++j) { wsum += w; w *= kTailRatio; }
        double tcur = tk[N - 1];
        w = 1.0;
        for (int j = 0; j < msub; ++j) {
            dtk[N - 1 + j] = dt * w / wsum;
            tcur += dtk[N - 1 + j];
            tk[N - 1 + j + 1] = tcur;
            w *= kTailRatio;
        }
        tk[M] = T;
    }
    std::vector<double> idw(static_cast<size_t>(n) * M);
    {
        std::vector<double> xi(msub);
        for (int j = 0; j < n; ++j) {
            for (int m = 0; m + 1 < N; ++m)
                idw[static_cast<size_t>(j) * M + m] = ens.dw(j, m);
            // Brownian-bridge split of the final increment across the substeps
            double D = ens.dw(j, N - 1);
            GaussianStream gs(substream_seed(ens.master_seed ^ 0x7461696cULL, static_cast<std::uint64_t>(j)));
            double S = 0.0;
            for (int q = 0; q < msub; ++q) { xi[q] = std::sqrt(dtk[N - 1 + q]) * gs.next(); S += xi[q]; }
            for (int q = 0; q < msub; ++q)
                idw[static_cast<size_t>(j) * M + N - 1 + q] = xi[q] + (dtk[N - 1 + q] / dt) * (D - S);
        }
        int half = n / 2;
        for (int j = 0; j < half; ++j)
            for (int m = 0; m < M; ++m)
                idw[static_cast<size_t>(half + j) * M + m] = -idw[static_cast<size_t>(j) * M + m];
        for (int m = 0; m < M; ++m) {
            double s2 = 0.0;
            for (int j = 0; j < n; ++j) {
                double d = idw[static_cast<size_t>(j) * M + m];
                s2 += d * d;
            }
            if (s2 <= 0.0) continue;
            double sc = std::sqrt(dtk[m] / (s2 / n));
            for (int j = 0; j < n; ++j) idw[static_cast<size_t>(j) * M + m] *= sc;
        }
    }
    std::vector<double> ix(static_cast<size_t>(n) * (M + 1));
    std::vector<double> sig(M);
    double sig_max = 0.0;
    for (int m = 0; m < M; ++m) {
        sig[m] = p.forward.sigma(tk[m]);
        sig_max = std::max(sig_max, std::abs(sig[m]));
    }
    for (int j = 0; j < n; ++j) {
        double xv = p.forward.x0;
        ix[static_cast<size_t>(j) * (M + 1)] = xv;
        for (int m = 0; m < M; ++m) {
            xv += p.forward.drift(tk[m], xv) * dtk[m] +
                  sig[m] * idw[static_cast<size_t>(j) * M + m];
            ix[static_cast<size_t>(j) * (M + 1) + m + 1] = xv;
        }
    }
    auto xat = [&](int path, int knot) { return ix[static_cast<size_t>(path) * (M + 1) + knot]; };
    auto dwat = [&](int path, int step) { return idw[static_cast<size_t>(path) * M + step]; };

    // terminal values on the caller's paths (exact, pathwise)
    double max_gy = 0.0;
    for (int j = 0; j < n; ++j) {
        double v = eval_terminal(p, ens.x(j, N));
        sol.Y[static_cast<size_t>(N) * n + j] = v;
        max_gy = std::max(max_gy, std::abs(v));
    }

    // default gradient cap: for drivers the gradient obeys a maximum
    // principle, so |Z| is bounded by the steepest terminal secant seen over
    // the realised terminal range (1.5x margin for discretisation effects)
    double zcap_flat;
    {
        double xlo = xat(0, M), xhi = xlo;
        for (int j = 0; j < n; ++j) {
            xlo = std::min(xlo, xat(j, M));
            xhi = std::max(xhi, xat(j, M));
        }
        double slope = 0.0;
        const int probes = 512;
        double gp = eval_terminal(p, xlo);
        for (int k = 1; k <= probes; ++k) {
            double x = xlo + (xhi - xlo) * k / probes;
            double gc = eval_terminal(p, x);
            slope = std::max(slope, std::abs(gc - gp) / std::max((xhi - xlo) / probes, 1e-12));
            gp = gc;
        }
        zcap_flat = 1.5 * sig_max * std::max(slope, 1.0);
    }

    // divergence guard, calibrated from the terminal data and driver size
    double C_f = 0.0;
    for (int j = 0; j < std::min(n, 256); ++j) {
        double x = xat(j, M);
        C_f = std::max(C_f, std::abs(eval_generator(p, T, x, 0.0, 0.0)) /
                              (1.0 + pow_abs(x, p.growth.r_f + 1.0)));
    }
    const double C_guard = std::max(1.0, max_gy) + T * C_f;

    // pathwise accumulator g(X_T) + sum dt f on the working cloud
    std::vector<double> accum(n);
    for (int j = 0; j < n; ++j) accum[j] = eval_terminal(p, xat(j, M));

    std::vector<double> est(n);
    std::vector<double> xc(NB), my(NB), ynode(NB), znode(NB), Fv(NB), zfin(NB), zprev(NB);
    std::vector<double> env(NB), delta(NB);
    std::vector<std::vector<double>> J(NB, std::vector<double>(NB));
    std::vector<int> order(n);
    bool have_zprev = false;
    Profile prof;
    GradOp G;

    // secant slope of the terminal condition across neighbouring bin centres;
    // bounded even at jumps, exact for affine data
    auto terminal_secant = [&](const std::vector<double>& centers, int nb, int b) {
        int l = std::max(0, b - 1), h = std::min(nb - 1, b + 1);
        double den = centers[h] - centers[l];
        if (den <= 1e-12) return 0.0;
        return (eval_terminal(p, centers[h]) - eval_terminal(p, centers[l])) / den;
    };

    for (int i = M - 1; i >= 0; --i) {
        const double t = tk[i];
        const double dti = dtk[i];
        const int ci = (i <= N - 1) ? i : -1;   // matching caller step, if any
        if (!prof.ready) for (int j = 0; j < n; ++j) est[j] = accum[j];
        else for (int j = 0; j < n; ++j) est[j] = prof.eval(xat(j, i + 1));

        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return xat(a, i) < xat(b, i); });
        double spread = xat(order[n - 1], i) - xat(order[0], i);
        int nb = spread < 1e-12 ? 1 : NB;

        double resid2 = 0.0;
        for (int b = 0; b < nb; ++b) {
            int lo = static_cast<int>(static_cast<long>(b) * n / nb);
            int hi = static_cast<int>(static_cast<long>(b + 1) * n / nb);
            int cnt = hi - lo;
            if (cnt < basis.min_paths_per_bin)
                throw OccupancyError("solve_mc: bin " + std::to_string(b) + " at step " +
                                     std::to_string(i) + " holds " + std::to_string(cnt) +
                                     " paths (< " + std::to_string(basis.min_paths_per_bin) + ")");
            double m = 0, cx = 0, mw = 0;
            for (int k = lo; k < hi; ++k) {
                int q = order[k];
                m += est[q]; cx += xat(q, i); mw += dwat(q, i);
            }
            my[b] = m / cnt;
            xc[b] = cx / cnt;
            for (int k = lo; k < hi; ++k) {
                double dy = est[order[k]] - my[b];
                resid2 += dy * dy;
            }
            mw /= cnt;
            // envelope for the gradient at this bin centre
            env[b] = trunc ? z_temporal_bound(*trunc, std::min(t, T - dt), xc[b]) : zcap_flat;
        }
        if (ci >= 0) sol.regression_residual[ci] = std::sqrt(resid2 / n);

        if (nb == 1) {
            // degenerate spatial spread (t = 0 or sigma = 0): single node
            double z = have_zprev ? zprev[NB / 2] : 0.0;
            z = std::clamp(z, -env[0], env[0]);
            double fv = eval_generator(p, t, xc[0], my[0], z);
            ynode[0] = my[0] + dti * fv;
            for (int k = 0; k < n; ++k)
                accum[k] += dti * eval_generator(p, t, xat(k, i), my[0], z);
            prof.x = {xc[0]}; prof.y = {ynode[0]};
            double s = sig[i] != 0.0 ? z / sig[i] : 0.0;
            prof.slo = prof.shi = s;
            prof.ready = true;
            if (ci >= 0)
                for (int j = 0; j < n; ++j) {
                    sol.Y[static_cast<size_t>(ci) * n + j] = prof.eval(ens.x(j, ci));
                    sol.Z[static_cast<size_t>(ci) * n + j] = z;
                }
            continue;
        }

        // martingale control variate: remove the gradient-driven part of the
        // conditional-mean sampling noise using the measured increment means
        for (int b = 0; b < nb; ++b) {
            int lo = static_cast<int>(static_cast<long>(b) * n / nb);
            int hi = static_cast<int>(static_cast<long>(b + 1) * n / nb);
            double mw = 0;
            for (int k = lo; k < hi; ++k) mw += dwat(order[k], i);
            mw /= (hi - lo);
            double sref = have_zprev ? (sig[i] != 0.0 ? zprev[b] / sig[i] : 0.0)
                                     : terminal_secant(xc, nb, b);
            double cap = sig[i] != 0.0 ? env[b] / std::abs(sig[i]) : 0.0;
            sref = std::clamp(sref, -cap, cap);
            my[b] -= sref * mw;
        }

        G.build(xc, nb, kStencilHalfWidth, kProjectionDegree);
        const double wz = have_zprev ? kGradientBlend : 1.0;
        const double s_i = sig[i];
        auto blend_z = [&](int b) {
            return wz * s_i * znode[b] + (1.0 - wz) * (have_zprev ? zprev[b] : 0.0);
        };

        // implicit nodal solve: y_b = my_b + dt f(t, x_b, my_b, clip(sigma (F y)_b))
        // via Newton with the exact dense Jacobian of the linear gradient map
        for (int b = 0; b < nb; ++b) ynode[b] = my[b];
        double resid = 0.0;
        for (int it = 0; it < kNewtonMaxIter; ++it) {
            G.apply(ynode, znode);
            resid = 0.0;
            for (int b = 0; b < nb; ++b) {
                double z = std::clamp(blend_z(b), -env[b], env[b]);
                Fv[b] = ynode[b] - my[b] - dti * eval_generator(p, t, xc[b], my[b], z);
                resid = std::max(resid, std::abs(Fv[b]));
            }
            if (resid < kNewtonTol) break;
            for (int b = 0; b < nb; ++b) {
                double zr = blend_z(b);
                bool clipped = std::abs(zr) > env[b];
                double z = std::clamp(zr, -env[b], env[b]);
                double h = 1e-6 * (1.0 + std::abs(z));
                double fp = clipped ? 0.0
                                    : (eval_generator(p, t, xc[b], my[b], z + h) -
                                       eval_generator(p, t, xc[b], my[b], z - h)) / (2.0 * h);
                for (int c = 0; c < nb; ++c) J[b][c] = (b == c ? 1.0 : 0.0);
                if (!clipped)
                    for (int c = 0; c < nb; ++c) J[b][c] -= dti * fp * wz * s_i * G.F[b][c];
            }
            for (int b = 0; b < nb; ++b) delta[b] = -Fv[b];
            for (int r = 0; r < nb; ++r) {
                int pv = r;
                for (int k = r + 1; k < nb; ++k)
                    if (std::abs(J[k][r]) > std::abs(J[pv][r])) pv = k;
                std::swap(J[r], J[pv]); std::swap(delta[r], delta[pv]);
                for (int k = r + 1; k < nb; ++k) {
                    double f = J[k][r] / J[r][r];
                    if (f == 0.0) continue;
                    for (int c = r; c < nb; ++c) J[k][c] -= f * J[r][c];
                    delta[k] -= f * delta[r];
                }
            }
            for (int r = nb; r-- > 0;) {
                double s = delta[r];
                for (int c = r + 1; c < nb; ++c) s -= J[r][c] * delta[c];
                delta[r] = s / J[r][r];
            }
            for (int b = 0; b < nb; ++b) ynode[b] += delta[b];
        }
        if (!std::isfinite(resid) || resid > 1e-6)
            throw DivergenceError("solve_mc: nodal solve stalled at step " + std::to_string(i) +
                                  " (residual " + std::to_string(resid) + ")");

        G.apply(ynode, znode);
        long clips = 0;
        for (int b = 0; b < nb; ++b) {
            double zr = blend_z(b);
            zfin[b] = std::clamp(zr, -env[b], env[b]);
            if (zfin[b] != zr) {
                int lo = static_cast<int>(static_cast<long>(b) * n / nb);
                int hi = static_cast<int>(static_cast<long>(b + 1) * n / nb);
                clips += hi - lo;
            }
            zprev[b] = zfin[b];
        }
        if (ci >= 0) sol.clip_fraction[ci] = static_cast<double>(clips) / n;
        have_zprev = true;

        for (int b = 0; b < nb; ++b) {
            int lo = static_cast<int>(static_cast<long>(b) * n / nb);
            int hi = static_cast<int>(static_cast<long>(b + 1) * n / nb);
            for (int k = lo; k < hi; ++k) {
                int q = order[k];
                double y_new = ynode[b];
                double x = xat(q, i);
                accum[q] += dti * eval_generator(p, t, x, my[b], zfin[b]);
                double env_y = C_guard * (1.0 + pow_abs(x, p.growth.p_g) +
                                          (T - t) * pow_abs(x, p.growth.r_f + 1.0));
                if (!std::isfinite(y_new) || std::abs(y_new) > 10.0 * env_y)
                    throw DivergenceError("solve_mc: |Y| exceeds 10x the growth envelope at step " +
                                          std::to_string(i));
            }
        }

        // tails are anchored to the terminal slope: for these drivers the
        // gradient relaxes to the terminal gradient in the far field, and an
        // external anchor breaks the feedback loop a measured tail slope
        // would close
        prof.x.assign(xc.begin(), xc.begin() + nb);
        prof.y.assign(ynode.begin(), ynode.begin() + nb);
        prof.slo = terminal_secant(xc, nb, 0);
        prof.shi = terminal_secant(xc, nb, nb - 1);
        prof.ready = true;

        if (ci >= 0) {
            std::vector<double> zx(zfin.begin(), zfin.begin() + nb);
            for (int j = 0; j < n; ++j) {
                double x = ens.x(j, ci);
                sol.Y[static_cast<size_t>(ci) * n + j] = prof.eval(x);
                sol.Z[static_cast<size_t>(ci) * n + j] = interp_at(prof.x, zx, x);
            }
        }
    }

    // antithetic pairs are dependent, so the standard error is taken over
    // independent pair averages (plus any unpaired leftover path)
    std::vector<double> units;
    {
        int half = n / 2;
        units.reserve(half + n % 2);
        for (int j = 0; j < half; ++j) units.push_back(0.5 * (accum[j] + accum[half + j]));
        if (n % 2) units.push_back(accum[n - 1]);
    }
    double mean = std::accumulate(accum.begin(), accum.end(), 0.0) / n;
    double var = 0.0;
    for (double v : units) var += (v - mean) * (v - mean);
    size_t m = units.size();
    var /= std::max<size_t>(1, m - 1);
    sol.y0 = mean;
    sol.y0_se = std::sqrt(var / m);
    return sol;
}

ContinuityProbeReport terminal_continuity_probe(const ProblemSpec& p, const PathEnsemble& ens,
                                                const RegressionBasis& basis,
                                                const std::vector<double>& probe_times,
                                                const std::optional<BoundParams>& trunc) {
    BackwardSolution sol = solve_mc(p, ens, basis, trunc);
    const int n = ens.n_paths;
    const int N = ens.grid.N;

    ContinuityProbeReport rep;
    std::vector<double> lx, ly;
    for (double tp : probe_times) {
        int k = static_cast<int>(std::lround(tp / ens.grid.dt()));
        k = std::clamp(k, 0, N - 1);
        double gap = 0.0;
        for (int j = 0; j < n; ++j)
            gap += std::abs(sol.y(k, j) - sol.y(N, j));
        gap /= n;
        rep.probe_times.push_back(ens.grid.knot(k));
        rep.gaps.push_back(gap);
        double tau = ens.grid.T - ens.grid.knot(k);
        if (tau > 0.0 && gap > 0.0) {
            lx.push_back(std::log(tau));
            ly.push_back(std::log(gap));
        }
    }

    // decreasing over the last four probes as T' increases
    rep.monotone_tail = true;
    size_t m = rep.gaps.size();
    size_t tail = std::min<size_t>(4, m);
    for (size_t i = m - tail; i + 1 < m; ++i)
        if (rep.gaps[i + 1] > rep.gaps[i]) rep.monotone_tail = false;

    if (lx.size() >= 2) {
        double nn = static_cast<double>(lx.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (size_t i = 0; i < lx.size(); ++i) {
            sx += lx[i]; sy += ly[i]; sxx += lx[i] * lx[i]; sxy += lx[i] * ly[i];
        }
        double vxx = sxx - sx * sx / nn;
        if (vxx > 0) rep.fitted_decay = (sxy - sx * sy / nn) / vxx;
        else rep.fit_ok = false;
    } else {
        rep.fit_ok = false;
        rep.note = "not enough distinct probes for a decay fit";
    }
    if (!rep.monotone_tail && rep.note.empty())
        rep.note = "gap sequence not monotone over the last probes (noise-dominated)";
    return rep;
}

} // namespace superbsde
