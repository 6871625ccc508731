#include "superbsde/verify.hpp"
#include "superbsde/config.hpp"
#include "superbsde/csv.hpp"
#include "superbsde/errors.hpp"
#include "superbsde/forward.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>

namespace superbsde {

std::string claim_name(Claim c) {
    switch (c) {
    case Claim::Comparison: return "comparison";
    case Claim::YEnvelope: return "y_envelope";
    case Claim::ZEnvelope: return "z_envelope";
    case Claim::ZIntegral: return "z_integral";
    case Claim::SupconvMonotone: return "supconv_monotone";
    case Claim::BlowupRate: return "blowup_rate";
    case Claim::TerminalContinuity: return "terminal_continuity";
    case Claim::TruncationInertness: return "truncation_inertness";
    }
    return "?";
}

bool parse_claim(const std::string& s, Claim& out) {
    for (Claim c : {Claim::Comparison, Claim::YEnvelope, Claim::ZEnvelope, Claim::ZIntegral,
                    Claim::SupconvMonotone, Claim::BlowupRate, Claim::TerminalContinuity,
                    Claim::TruncationInertness}) {
        if (claim_name(c) == s) { out = c; return true; }
    }
    return false;
}

void ExperimentPlan::validate() const {
    size_t want = claim == Claim::Comparison ? 2 : 1;
    if (problems.size() != want)
        throw ConfigError("plan for claim '" + claim_name(claim) + "' needs " +
                          std::to_string(want) + " problem(s), got " + std::to_string(problems.size()));
    if (resolutions.empty())
        throw ConfigError("plan needs at least one resolution");
    if (claim == Claim::SupconvMonotone && n_list.size() < 2)
        throw ConfigError("supconv ladder needs at least two stiffness values");
}

double VerificationReport::stat(const std::string& name) const {
    for (const auto& [k, v] : stats)
        if (k == name) return v;
    throw ConfigError("report has no stat named '" + name + "'");
}

namespace {

struct BinStat {
    double center = 0.0;
    double mean = 0.0;
    double se = 0.0;
    int count = 0;
};

// quantile bins of values[paths] keyed by key[paths]
std::vector<BinStat> bin_stats(const std::vector<double>& key, const std::vector<double>& val,
                               int bins) {
    const int n = static_cast<int>(key.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return key[a] < key[b]; });
    int nb = key[order.back()] - key[order.front()] < 1e-12 ? 1 : bins;
    std::vector<BinStat> out;
    for (int b = 0; b < nb; ++b) {
        int lo = static_cast<int>(static_cast<long>(b) * n / nb);
        int hi = static_cast<int>(static_cast<long>(b + 1) * n / nb);
        BinStat s;
        s.count = hi - lo;
        for (int k = lo; k < hi; ++k) {
            s.center += key[order[k]];
            s.mean += val[order[k]];
        }
        s.center /= s.count;
        s.mean /= s.count;
        double var = 0.0;
        for (int k = lo; k < hi; ++k) {
            double d = val[order[k]] - s.mean;
            var += d * d;
        }
        var /= std::max(1, s.count - 1);
        s.se = std::sqrt(var / s.count);
        out.push_back(s);
    }
    return out;
}

PdeConfig pde_config_for(const ProblemSpec& p, const Resolution& r) {
    return PdeConfig::auto_domain(p, r.pde_nx, r.pde_nt);
}

void ensure_dir(const std::string& dir) {
    if (!dir.empty()) std::filesystem::create_directories(dir);
}

double dominance_margin(const ProblemSpec& p1, const ProblemSpec& p2,
                        double x_lo, double x_hi, double T) {
    // min over samples of (g2-g1) and (f2-f1)
    double worst = std::numeric_limits<double>::infinity();
    const int ng = 2000;
    for (int i = 0; i <= ng; ++i) {
        double x = x_lo + (x_hi - x_lo) * i / ng;
        worst = std::min(worst, eval_terminal(p2, x) - eval_terminal(p1, x));
    }
    const int ns = 4000;
    std::uint64_t st = 77;
    auto u01 = [&st] {
        std::uint64_t z = (st += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return static_cast<double>((z ^ (z >> 31)) >> 11) * (1.0 / 9007199254740992.0);
    };
    for (int i = 0; i < ns; ++i) {
        double t = T * u01();
        double x = x_lo + (x_hi - x_lo) * u01();
        double y = -5.0 + 10.0 * u01();
        double z = -5.0 + 10.0 * u01();
        worst = std::min(worst, eval_generator(p2, t, x, y, z) - eval_generator(p1, t, x, y, z));
    }
    return worst;
}

} // namespace

BoundParams calibrate_bound_from_pde(const ProblemSpec& p, BoundKind kind,
                                     const ValueField& field, double safety) {
    BoundParams bp = BoundParams::from_growth(kind, p.growth, p.forward.T);
    bp.C = 1.0;
    bp.A = 1.0;
    bp.B = 1.0;
    double max_ratio = 0.0;
    const int j_lo = 2, j_hi = field.N_x - 2;
    const double dt = field.dt();
    const double lp1 = p.growth.l + 1.0;

    if (kind == BoundKind::ZIntegral) {
        // suffix-summed time integral of |sigma u_x|^{l+1}
        std::vector<double> suffix(static_cast<size_t>(field.nodes()), 0.0);
        for (int k = field.N_t - 1; k >= 0; --k) {
            double sig = p.forward.sigma(field.t_knot(k));
            for (int j = j_lo; j <= j_hi; ++j) {
                suffix[static_cast<size_t>(j)] += dt * pow_abs(sig * field.grad_at(k, j), lp1);
                double shape = z_integral_bound(bp, field.t_knot(k), field.x_node(j));
                max_ratio = std::max(max_ratio, suffix[static_cast<size_t>(j)] / shape);
            }
        }
        bp.C = max_ratio * safety;
    } else {
        int k_hi = kind == BoundKind::ZTemporal ? field.N_t - 2 : field.N_t;
        for (int k = 0; k <= k_hi; ++k) {
            double t = field.t_knot(k);
            double sig = p.forward.sigma(t);
            for (int j = j_lo; j <= j_hi; ++j) {
                double x = field.x_node(j);
                double measured, shape;
                switch (kind) {
                case BoundKind::YGrowth:
                    measured = std::abs(field.at(k, j));
                    shape = y_bound(bp, t, x);
                    break;
                case BoundKind::ZTemporal:
                    measured = std::abs(sig * field.grad_at(k, j));
                    shape = z_temporal_bound(bp, t, x);
                    break;
                case BoundKind::ZLipschitz:
                    measured = std::abs(sig * field.grad_at(k, j));
                    shape = z_bound_lipschitz(bp, t, x);   // A = B = 1 shape
                    break;
                default:
                    continue;
                }
                max_ratio = std::max(max_ratio, measured / shape);
            }
        }
        if (kind == BoundKind::ZLipschitz) {
            bp.A = max_ratio * safety;
            bp.B = max_ratio * safety;
        } else {
            bp.C = max_ratio * safety;
        }
    }
    bp.calibration = Calibration::PilotPde;
    bp.calibrated_at = "pilot-pde Nx=" + std::to_string(field.N_x) + " Nt=" + std::to_string(field.N_t);
    return bp;
}

VerificationReport run_comparison(const ProblemSpec& p1, const ProblemSpec& p2,
                                  const ExperimentPlan& plan) {
    VerificationReport rep;
    rep.claim = Claim::Comparison;

    PdeConfig pilot = pde_config_for(p1, plan.resolutions.front());
    double margin = dominance_margin(p1, p2, pilot.x_min, pilot.x_max, p1.forward.T);
    if (margin < -1e-9)
        throw DominanceError("dominance precondition fails: min(g2-g1, f2-f1) = " +
                             std::to_string(margin));
    rep.add("dominance_margin", margin);

    ensure_dir(plan.out_dir);
    double worst_mc = std::numeric_limits<double>::infinity();   // min of mean diff + 3 SE
    double worst_pde = std::numeric_limits<double>::infinity();  // min of u2 - u1 + tol
    bool pass = true;

    for (size_t r = 0; r < plan.resolutions.size(); ++r) {
        const Resolution& res = plan.resolutions[r];
        TimeGrid grid{p1.forward.T, res.steps};
        PathEnsemble ens = simulate(p1.forward, grid, res.paths, plan.seed);
        RegressionBasis basis{res.bins, 50};
        BackwardSolution s1 = solve_mc(p1, ens, basis);
        BackwardSolution s2 = solve_mc(p2, ens, basis);

        std::unique_ptr<CsvWriter> csv;
        if (!plan.out_dir.empty()) {
            std::string path = plan.out_dir + "/comparison_res" + std::to_string(r) + ".csv";
            csv = std::make_unique<CsvWriter>(path);
            csv->header({"t", "bin_center", "mean_diff", "se"});
            rep.artifacts.push_back(path);
        }

        for (int i = 0; i <= grid.N; ++i) {
            std::vector<double> key(static_cast<size_t>(res.paths));
            std::vector<double> diff(static_cast<size_t>(res.paths));
            for (int j = 0; j < res.paths; ++j) {
                key[static_cast<size_t>(j)] = ens.x(j, i);
                diff[static_cast<size_t>(j)] = s2.y(i, j) - s1.y(i, j);
            }
            for (const BinStat& b : bin_stats(key, diff, res.bins)) {
                double slack = b.mean + 3.0 * b.se;
                worst_mc = std::min(worst_mc, slack);
                if (slack < -1e-12) pass = false;
                if (csv) csv->row({grid.knot(i), b.center, b.mean, b.se});
            }
        }

        PdeConfig cfg = pde_config_for(p1, res);
        ValueField u1 = solve_pde(p1, cfg);
        ValueField u2 = solve_pde(p2, cfg);
        double scale = 0.0;
        for (double v : u2.u) scale = std::max(scale, std::abs(v));
        double grid_tol = 10.0 * (1.0 + scale) * (u1.dx() * u1.dx() + u1.dt());
        for (int k = 0; k <= cfg.N_t; ++k)
            for (int j = 2; j <= cfg.N_x - 2; ++j) {
                double d = u2.at(k, j) - u1.at(k, j) + grid_tol;
                worst_pde = std::min(worst_pde, d);
                if (d < 0.0) pass = false;
            }
        if (r == 0) rep.tol("pde_grid_tol", grid_tol);
    }

    rep.add("worst_mc_margin", worst_mc);
    rep.add("worst_pde_margin", worst_pde);
    rep.tol("mc_se_multiple", 3.0);
    rep.pass = pass;
    return rep;
}

VerificationReport run_envelope_audit(const ProblemSpec& p, const BoundParams& bp,
                                      const ExperimentPlan& plan) {
    if (bp.calibrated_at.empty())
        throw CalibrationError("BoundParams has no calibration provenance");
    VerificationReport rep;
    rep.claim = bp.kind == BoundKind::YGrowth ? Claim::YEnvelope
              : bp.kind == BoundKind::ZIntegral ? Claim::ZIntegral
              : Claim::ZEnvelope;
    ensure_dir(plan.out_dir);

    long pde_violations = 0;
    double worst_bin_fraction = 0.0;
    double c_min = std::numeric_limits<double>::infinity(), c_max = 0.0;
    const double lp1 = p.growth.l + 1.0;

    for (size_t r = 0; r < plan.resolutions.size(); ++r) {
        const Resolution& res = plan.resolutions[r];
        PdeConfig cfg = pde_config_for(p, res);
        ValueField field = solve_pde(p, cfg);

        // stability of the raw calibrated constant across resolutions
        BoundParams raw = calibrate_bound_from_pde(p, bp.kind, field, 1.0);
        double c_here = bp.kind == BoundKind::ZLipschitz ? raw.A : raw.C;
        c_min = std::min(c_min, c_here);
        c_max = std::max(c_max, c_here);

        // PDE interior violations of the supplied envelope
        int k_hi = bp.kind == BoundKind::ZTemporal ? field.N_t - 2 : field.N_t;
        std::vector<double> suffix(static_cast<size_t>(field.nodes()), 0.0);
        if (bp.kind == BoundKind::ZIntegral) {
            for (int k = field.N_t - 1; k >= 0; --k) {
                double sig = p.forward.sigma(field.t_knot(k));
                for (int j = 2; j <= field.N_x - 2; ++j) {
                    suffix[static_cast<size_t>(j)] += field.dt() * pow_abs(sig * field.grad_at(k, j), lp1);
                    if (suffix[static_cast<size_t>(j)] >
                        z_integral_bound(bp, field.t_knot(k), field.x_node(j)))
                        ++pde_violations;
                }
            }
        } else {
            for (int k = 0; k <= k_hi; ++k) {
                double t = field.t_knot(k);
                double sig = p.forward.sigma(t);
                for (int j = 2; j <= field.N_x - 2; ++j) {
                    double x = field.x_node(j);
                    double measured = bp.kind == BoundKind::YGrowth
                        ? std::abs(field.at(k, j))
                        : std::abs(sig * field.grad_at(k, j));
                    double env = bp.kind == BoundKind::YGrowth ? y_bound(bp, t, x)
                               : bp.kind == BoundKind::ZTemporal ? z_temporal_bound(bp, t, x)
                               : z_bound_lipschitz(bp, t, x);
                    if (measured > env) ++pde_violations;
                }
            }
        }

        // MC bin violations
        TimeGrid grid{p.forward.T, res.steps};
        PathEnsemble ens = simulate(p.forward, grid, res.paths, plan.seed);
        RegressionBasis basis{res.bins, 50};
        BackwardSolution sol = solve_mc(p, ens, basis);
        long bins_total = 0, bins_violating = 0;
        int knot_hi = bp.kind == BoundKind::ZTemporal ? grid.N - 2 : grid.N - 1;
        for (int i = 0; i <= knot_hi; ++i) {
            double t = grid.knot(i);
            std::vector<double> key(static_cast<size_t>(res.paths));
            std::vector<double> val(static_cast<size_t>(res.paths));
            for (int j = 0; j < res.paths; ++j) {
                key[static_cast<size_t>(j)] = ens.x(j, i);
                switch (bp.kind) {
                case BoundKind::YGrowth: val[static_cast<size_t>(j)] = std::abs(sol.y(i, j)); break;
                case BoundKind::ZIntegral: {
                    double acc = 0.0;
                    for (int m = i; m < grid.N; ++m)
                        acc += grid.dt() * pow_abs(sol.z(m, j), lp1);
                    val[static_cast<size_t>(j)] = acc;
                    break;
                }
                default: val[static_cast<size_t>(j)] = std::abs(sol.z(i, j)); break;
                }
            }
            for (const BinStat& b : bin_stats(key, val, res.bins)) {
                double env = bp.kind == BoundKind::YGrowth ? y_bound(bp, t, b.center)
                           : bp.kind == BoundKind::ZIntegral ? z_integral_bound(bp, t, b.center)
                           : bp.kind == BoundKind::ZTemporal ? z_temporal_bound(bp, t, b.center)
                           : z_bound_lipschitz(bp, t, b.center);
                ++bins_total;
                if (b.mean > env) ++bins_violating;
            }
        }
        worst_bin_fraction = std::max(worst_bin_fraction,
                                      static_cast<double>(bins_violating) / bins_total);
    }

    double stability = c_min > 0.0 ? c_max / c_min - 1.0 : 0.0;
    rep.add("pde_interior_violations", static_cast<double>(pde_violations));
    rep.add("mc_bin_violation_fraction", worst_bin_fraction);
    rep.add("calibration_spread", stability);
    rep.add("calibrated_constant", bp.kind == BoundKind::ZLipschitz ? bp.A : bp.C);
    rep.tol("mc_bin_violation_max", 0.01);
    rep.tol("calibration_spread_max", 0.25);
    rep.pass = pde_violations == 0 && worst_bin_fraction <= 0.01 && stability <= 0.25;
    return rep;
}

ProblemSpec with_supconv_terminal(const ProblemSpec& p, double n,
                                  double x_lo, double x_hi, double h_tab, double h_u) {
    SupConvConfig cfg;
    cfg.n = n;
    cfg.h_u = h_u;
    const int m = static_cast<int>(std::ceil((x_hi - x_lo) / h_tab));
    ProblemSpec q = p;
    q.terminal.family = TerminalFamily::Tabulated;
    q.terminal.tab_x.assign(static_cast<size_t>(m) + 1, 0.0);
    q.terminal.tab_v.assign(static_cast<size_t>(m) + 1, 0.0);
    for (int i = 0; i <= m; ++i) {
        double x = x_lo + (x_hi - x_lo) * i / m;
        q.terminal.tab_x[static_cast<size_t>(i)] = x;
        q.terminal.tab_v[static_cast<size_t>(i)] = sup_convolve(p.terminal, p.growth, cfg, x);
    }
    q.terminal.lsc_flag = true;
    // g_n is n-Lipschitz: TC.1 holds with r_g = 0
    q.growth.r_g = 0.0;
    q.growth.alpha = 2.0 * n;
    q.label = p.label + "_supconv_n" + std::to_string(n);
    return q;
}

VerificationReport run_supconv_ladder(const ProblemSpec& p, const std::vector<double>& n_list,
                                      const ExperimentPlan& plan) {
    if (!p.terminal.lsc_flag)
        throw GrowthError("supconv ladder requires a lower semi-continuous terminal condition");
    p.growth.validate_supconv();

    VerificationReport rep;
    rep.claim = Claim::SupconvMonotone;
    ensure_dir(plan.out_dir);

    const Resolution& res = plan.resolutions.front();
    PdeConfig cfg = pde_config_for(p, res);
    double n0 = admissible_n0(p.terminal, p.growth, cfg.x_min, cfg.x_max);
    rep.add("admissible_n0", n0);
    if (n_list.front() < n0)
        throw GrowthError("supconv ladder must start at n >= n0 = " + std::to_string(n0));

    TimeGrid grid{p.forward.T, res.steps};
    PathEnsemble ens = simulate(p.forward, grid, res.paths, plan.seed);
    RegressionBasis basis{res.bins, 50};

    BackwardSolution direct = solve_mc(p, ens, basis);
    rep.add("y0_direct", direct.y0);
    rep.add("y0_direct_se", direct.y0_se);

    std::unique_ptr<CsvWriter> csv;
    if (!plan.out_dir.empty()) {
        std::string path = plan.out_dir + "/supconv_ladder.csv";
        csv = std::make_unique<CsvWriter>(path);
        csv->header({"n", "y0", "se", "pde_u0", "abs_diff"});
        rep.artifacts.push_back(path);
    }

    bool pass = true;
    double prev_y0 = std::numeric_limits<double>::infinity();
    double max_se = 0.0;
    BoundParams ybp;   // pilot-calibrated growth envelope from the first rung
    bool have_ybp = false;
    for (size_t i = 0; i < n_list.size(); ++i) {
        ProblemSpec pn = with_supconv_terminal(p, n_list[i], cfg.x_min - 1.0, cfg.x_max + 1.0);
        BackwardSolution sol = solve_mc(pn, ens, basis);
        ValueField field = solve_pde(pn, cfg);
        double u0 = field.value(0.0, p.forward.x0);
        double diff = std::abs(sol.y0 - u0);
        double tol = std::max(0.02 * std::max(1.0, std::abs(u0)), 3.0 * sol.y0_se);
        if (diff > tol) pass = false;

        if (!have_ybp) {
            ybp = calibrate_bound_from_pde(pn, BoundKind::YGrowth, field);
            have_ybp = true;
        }
        if (std::abs(sol.y0) > y_bound(ybp, 0.0, p.forward.x0)) pass = false;

        max_se = std::max(max_se, sol.y0_se);
        if (sol.y0 > prev_y0 + 3.0 * max_se) pass = false;          // monotone within noise
        if (sol.y0 < direct.y0 - 3.0 * (sol.y0_se + direct.y0_se)) pass = false;  // bounded below
        prev_y0 = sol.y0;

        rep.add("y0_n" + std::to_string(static_cast<int>(n_list[i])), sol.y0);
        rep.add("se_n" + std::to_string(static_cast<int>(n_list[i])), sol.y0_se);
        rep.add("pde_n" + std::to_string(static_cast<int>(n_list[i])), u0);
        if (csv) csv->row({n_list[i], sol.y0, sol.y0_se, u0, diff});
    }
    rep.tol("oracle_rel_tol", 0.02);
    rep.tol("mc_se_multiple", 3.0);
    rep.pass = pass;
    return rep;
}

VerificationReport run_blowup_rate(const ProblemSpec& p, const ExperimentPlan& plan) {
    VerificationReport rep;
    rep.claim = Claim::BlowupRate;
    ensure_dir(plan.out_dir);

    // kink of the terminal condition, when the family has one
    std::optional<double> kink;
    switch (p.terminal.family) {
    case TerminalFamily::Power:
        if (p.terminal.exponent < 1.0) kink = 0.0;
        break;
    case TerminalFamily::Lipschitz: kink = 0.0; break;
    case TerminalFamily::Step: kink = p.terminal.at; break;
    default: break;
    }

    const double envelope_exp = -1.0 / (p.growth.l + 1.0);
    bool pass = true;
    for (size_t r = 0; r < plan.resolutions.size(); ++r) {
        PdeConfig cfg = pde_config_for(p, plan.resolutions[r]);
        ValueField field = solve_pde(p, cfg);
        RateFit fit = extract_rate_near_T(field, plan.rate_window_lo * p.forward.T,
                                          plan.rate_window_hi * p.forward.T, kink);
        rep.add("exponent_res" + std::to_string(r), fit.exponent);
        rep.add("r_squared_res" + std::to_string(r), fit.r_squared);
        if (fit.exponent < envelope_exp - 0.15) pass = false;   // no faster blow-up than the bound
    }
    rep.add("envelope_exponent", envelope_exp);
    rep.tol("exponent_slack", 0.15);
    rep.pass = pass;
    return rep;
}

VerificationReport run_truncation_inertness(const ProblemSpec& p, const ExperimentPlan& plan) {
    VerificationReport rep;
    rep.claim = Claim::TruncationInertness;
    const Resolution& res = plan.resolutions.front();

    PdeConfig cfg = pde_config_for(p, res);
    ValueField pilot = solve_pde(p, cfg);
    BoundParams trunc = calibrate_bound_from_pde(p, BoundKind::ZTemporal, pilot);

    TimeGrid grid{p.forward.T, res.steps};
    PathEnsemble ens = simulate(p.forward, grid, res.paths, plan.seed);
    RegressionBasis basis{res.bins, 50};
    BackwardSolution plain = solve_mc(p, ens, basis);
    BackwardSolution truncated = solve_mc(p, ens, basis, trunc);

    double shift = std::abs(truncated.y0 - plain.y0);
    double clip = truncated.total_clip_fraction();
    rep.add("y0_plain", plain.y0);
    rep.add("y0_truncated", truncated.y0);
    rep.add("y0_shift", shift);
    rep.add("clip_fraction", clip);
    rep.add("envelope_C", trunc.C);
    rep.tol("y0_shift_max_se", 1.0);
    rep.tol("clip_fraction_max", 0.001);
    rep.pass = shift <= std::max(plain.y0_se, 1e-12) && clip < 0.001;
    return rep;
}

VerificationReport run_terminal_continuity(const ProblemSpec& p, const ExperimentPlan& plan) {
    VerificationReport rep;
    rep.claim = Claim::TerminalContinuity;
    const Resolution& res = plan.resolutions.front();
    TimeGrid grid{p.forward.T, res.steps};
    PathEnsemble ens = simulate(p.forward, grid, res.paths, plan.seed);
    RegressionBasis basis{res.bins, 50};

    std::vector<double> probes;
    for (int k = std::min(8, grid.N - 1); k >= 1; --k)
        probes.push_back(grid.knot(grid.N - k));
    ContinuityProbeReport pr = terminal_continuity_probe(p, ens, basis, probes);
    for (size_t i = 0; i < pr.gaps.size(); ++i)
        rep.add("gap_" + std::to_string(i), pr.gaps[i]);
    rep.add("fitted_decay", pr.fitted_decay);
    rep.add("monotone_tail", pr.monotone_tail ? 1.0 : 0.0);
    rep.note = pr.note;
    rep.pass = pr.monotone_tail;
    return rep;
}

VerificationReport run_plan(const ExperimentPlan& plan) {
    plan.validate();
    switch (plan.claim) {
    case Claim::Comparison:
        return run_comparison(plan.problems[0], plan.problems[1], plan);
    case Claim::YEnvelope:
    case Claim::ZEnvelope:
    case Claim::ZIntegral: {
        BoundKind kind = plan.claim == Claim::YEnvelope ? BoundKind::YGrowth
                       : plan.claim == Claim::ZIntegral ? BoundKind::ZIntegral
                       : BoundKind::ZTemporal;
        const ProblemSpec& p = plan.problems[0];
        PdeConfig cfg = pde_config_for(p, plan.resolutions.front());
        ValueField pilot = solve_pde(p, cfg);
        BoundParams bp = calibrate_bound_from_pde(p, kind, pilot);
        return run_envelope_audit(p, bp, plan);
    }
    case Claim::SupconvMonotone:
        return run_supconv_ladder(plan.problems[0], plan.n_list, plan);
    case Claim::BlowupRate:
        return run_blowup_rate(plan.problems[0], plan);
    case Claim::TerminalContinuity:
        return run_terminal_continuity(plan.problems[0], plan);
    case Claim::TruncationInertness:
        return run_truncation_inertness(plan.problems[0], plan);
    }
    throw ConfigError("unknown claim");
}

ExperimentPlan parse_plan_text(const std::string& text, const std::string& origin) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text, nullptr, true, true);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("plan " + origin + " is not valid JSON: " + e.what());
    }
    ExperimentPlan plan;
    if (!j.contains("claim") || !j["claim"].is_string())
        throw ConfigError("plan error at claim: missing claim name");
    if (!parse_claim(j["claim"].get<std::string>(), plan.claim))
        throw ConfigError("plan error at claim: unknown claim '" + j["claim"].get<std::string>() + "'");
    if (j.contains("seed")) plan.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("out_dir")) plan.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("n_list")) plan.n_list = j["n_list"].get<std::vector<double>>();
    if (j.contains("rate_window")) {
        plan.rate_window_lo = j["rate_window"][0].get<double>();
        plan.rate_window_hi = j["rate_window"][1].get<double>();
    }
    if (!j.contains("problems") || !j["problems"].is_array())
        throw ConfigError("plan error at problems: expected an array of problem objects");
    for (const auto& pj : j["problems"]) {
        nlohmann::json wrapper;
        wrapper["problem"] = pj;
        plan.problems.push_back(parse_config_text(wrapper.dump(), origin).problem);
    }
    if (j.contains("resolutions")) {
        for (const auto& rj : j["resolutions"]) {
            Resolution r;
            if (rj.contains("paths")) r.paths = rj["paths"].get<int>();
            if (rj.contains("steps")) r.steps = rj["steps"].get<int>();
            if (rj.contains("bins")) r.bins = rj["bins"].get<int>();
            if (rj.contains("nx")) r.pde_nx = rj["nx"].get<int>();
            if (rj.contains("nt")) r.pde_nt = rj["nt"].get<int>();
            plan.resolutions.push_back(r);
        }
    }
    if (plan.resolutions.empty()) plan.resolutions.push_back({});
    plan.validate();
    return plan;
}

ExperimentPlan load_plan_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open plan file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_plan_text(ss.str(), path);
}

void write_report(const VerificationReport& rep, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("cannot write report: " + path);
    out << "claim: " << claim_name(rep.claim) << '\n';
    out << "result: " << (rep.pass ? "PASS" : "FAIL") << '\n';
    for (const auto& [k, v] : rep.stats)
        out << "stat " << k << " = " << CsvWriter::format(v) << '\n';
    for (const auto& [k, v] : rep.tolerances)
        out << "tolerance " << k << " = " << CsvWriter::format(v) << '\n';
    for (const auto& a : rep.artifacts)
        out << "artifact " << a << '\n';
    if (!rep.note.empty())
        out << "note: " << rep.note << '\n';
}

} // namespace superbsde
