#include "superbsde/bounds.hpp"
#include "superbsde/config.hpp"
#include "superbsde/csv.hpp"
#include "superbsde/errors.hpp"
#include "superbsde/forward.hpp"
#include "superbsde/manifest.hpp"
#include "superbsde/mcsolver.hpp"
#include "superbsde/pde.hpp"
#include "superbsde/problem.hpp"
#include "superbsde/supconv.hpp"
#include "superbsde/verify.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numeric>

using namespace superbsde;

namespace {

int g_exit = 0;

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    int threads = 0;
};

void add_common(CLI::App* sub, CommonOpts& opts, bool config_required = true) {
    auto* c = sub->add_option("--config,config", opts.config_path, "problem config file (JSON)")
                  ->envname("SUPERBSDE_CONFIG");
    if (config_required) c->required();
    sub->add_option("--seed", opts.seed, "master seed")->envname("SUPERBSDE_SEED");
    sub->add_option("--out-dir", opts.out_dir, "output directory")->envname("SUPERBSDE_OUT_DIR");
    sub->add_option("--threads", opts.threads, "worker thread cap (0 = all cores)")
        ->envname("SUPERBSDE_THREADS");
}

struct Run {
    CommonOpts& opts;
    RunManifest man;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    Run(CommonOpts& o, const std::string& subcommand, const std::string& config_text) : opts(o) {
        set_max_threads(o.threads);
        std::filesystem::create_directories(o.out_dir);
        man.subcommand = subcommand;
        man.master_seed = o.seed;
        man.config_text = canonicalize_config_text(config_text);
        man.config_digest = sha256_hex(man.config_text);
    }

    std::string out(const std::string& name) {
        std::string p = opts.out_dir + "/" + name;
        man.outputs.push_back(p);
        return p;
    }

    void finish(bool pass) {
        man.pass = pass;
        man.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        man.save(opts.out_dir + "/manifest.json");
        if (!pass) g_exit = std::max(g_exit, 1);
    }
};

void cmd_simulate(CommonOpts& opts, int paths_override, int steps_override) {
    LoadedConfig cfg = load_config_file(opts.config_path);
    Run run(opts, "simulate", cfg.raw_text);
    int paths = paths_override > 0 ? paths_override : cfg.mc_paths;
    int steps = steps_override > 0 ? steps_override : cfg.mc_steps;
    TimeGrid grid{cfg.problem.forward.T, steps};
    PathEnsemble ens = simulate(cfg.problem.forward, grid, paths, opts.seed);
    save_ensemble(ens, run.out("ensemble.bin"));

    double p = std::max(2.0, cfg.problem.growth.p_g);
    MomentCheckReport mom = conditional_moment_check(ens, p);
    CsvWriter csv(run.out("moments.csv"));
    csv.header({"p", "fitted_C", "max_bin_ratio", "bins"});
    csv.row({mom.p, mom.fitted_C, mom.max_bin_ratio, static_cast<double>(mom.bins)});

    run.man.resolutions = {{"paths", std::to_string(paths)}, {"steps", std::to_string(steps)}};
    run.man.constants = {{"moment_C", mom.fitted_C}, {"max_bin_ratio", mom.max_bin_ratio}};
    std::cout << "simulated " << paths << " paths, " << steps << " steps; moment C = "
              << mom.fitted_C << "\n";
    run.finish(true);
}

void cmd_solve_pde(CommonOpts& opts, bool clip) {
    LoadedConfig cfg = load_config_file(opts.config_path);
    Run run(opts, "solve-pde", cfg.raw_text);
    PdeConfig pcfg = cfg.has_pde ? cfg.pde : PdeConfig::auto_domain(cfg.problem, 200, 1000);
    if (clip) {
        ValueField pilot_field = solve_pde(cfg.problem, [&] {
            PdeConfig c = pcfg;
            c.N_t = std::max(64, pcfg.N_t / 8);
            c.skip_cfl_check = true;
            return c;
        }());
        pcfg.gradient_clip =
            calibrate_bound_from_pde(cfg.problem, BoundKind::ZTemporal, pilot_field);
    }
    ValueField field = solve_pde(cfg.problem, pcfg);

    CsvWriter csv(run.out("pde_field.csv"));
    csv.header({"t", "x", "u", "ux", "clipped"});
    int stride_t = std::max(1, field.N_t / 200);   // slices, not the full history
    for (int k = 0; k <= field.N_t; k += stride_t)
        for (int j = 0; j <= field.N_x; ++j)
            csv.row({field.t_knot(k), field.x_node(j), field.at(k, j), field.grad_at(k, j),
                     field.clipped_at(k, j) ? 1.0 : 0.0});

    double u0 = field.value(0.0, cfg.problem.forward.x0);
    run.man.resolutions = {{"N_x", std::to_string(field.N_x)}, {"N_t", std::to_string(field.N_t)}};
    run.man.constants = {{"u0", u0}, {"clip_events", static_cast<double>(field.clip_events)}};
    std::cout << "u(0, x0) = " << CsvWriter::format(u0)
              << "  clip_events = " << field.clip_events << "\n";
    run.finish(true);
}

void cmd_solve_mc(CommonOpts& opts, const std::string& ensemble_path) {
    LoadedConfig cfg = load_config_file(opts.config_path);
    Run run(opts, "solve-mc", cfg.raw_text);
    PathEnsemble ens;
    if (!ensemble_path.empty()) {
        ens = load_ensemble(ensemble_path);
    } else {
        TimeGrid grid{cfg.problem.forward.T, cfg.mc_steps};
        ens = simulate(cfg.problem.forward, grid, cfg.mc_paths, opts.seed);
    }

    std::optional<BoundParams> trunc;
    if (cfg.mc_truncate) {
        PdeConfig pcfg = cfg.has_pde ? cfg.pde : PdeConfig::auto_domain(cfg.problem, 200, 1000);
        trunc = calibrate_bound_from_pde(cfg.problem, BoundKind::ZTemporal,
                                         solve_pde(cfg.problem, pcfg));
    }
    BackwardSolution sol = solve_mc(cfg.problem, ens, cfg.mc_basis, trunc);

    CsvWriter csv(run.out("mc_solution.csv"));
    csv.header({"t", "bin_center", "Y_hat", "Z_hat", "clip_fraction"});
    const int n = sol.n_paths;
    std::vector<int> order(n);
    for (int i = 0; i < ens.grid.N; ++i) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return ens.x(a, i) < ens.x(b, i); });
        for (int b = 0; b < cfg.mc_basis.bins; ++b) {
            int lo = static_cast<int>(static_cast<long>(b) * n / cfg.mc_basis.bins);
            int hi = static_cast<int>(static_cast<long>(b + 1) * n / cfg.mc_basis.bins);
            if (lo >= hi) continue;
            double cx = 0, my = 0, mz = 0;
            for (int k = lo; k < hi; ++k) {
                cx += ens.x(order[k], i);
                my += sol.y(i, order[k]);
                mz += sol.z(i, order[k]);
            }
            csv.row({ens.grid.knot(i), cx / (hi - lo), my / (hi - lo), mz / (hi - lo),
                     sol.clip_fraction[static_cast<size_t>(i)]});
        }
    }

    run.man.resolutions = {{"paths", std::to_string(n)},
                           {"steps", std::to_string(ens.grid.N)},
                           {"bins", std::to_string(cfg.mc_basis.bins)}};
    run.man.constants = {{"y0", sol.y0},
                         {"y0_se", sol.y0_se},
                         {"clip_fraction", sol.total_clip_fraction()}};
    if (trunc) run.man.constants.emplace_back("trunc_C", trunc->C);
    std::cout << "y0 = " << CsvWriter::format(sol.y0) << "  se = " << CsvWriter::format(sol.y0_se)
              << "\n";
    run.finish(true);
}

void cmd_supconv(CommonOpts& opts, std::vector<double> n_values, double x_lo, double x_hi,
                 int points) {
    LoadedConfig cfg = load_config_file(opts.config_path);
    Run run(opts, "supconv", cfg.raw_text);
    SupConvConfig sc = cfg.has_supconv ? cfg.supconv : SupConvConfig{};
    if (n_values.empty()) n_values.push_back(sc.n);

    CsvWriter csv(run.out("supconv.csv"));
    std::vector<std::string> head{"x", "g"};
    for (double nv : n_values) {
        head.push_back("g_n" + CsvWriter::format(nv));
        head.push_back("gap_n" + CsvWriter::format(nv));
    }
    csv.header(head);
    for (int i = 0; i <= points; ++i) {
        double x = x_lo + (x_hi - x_lo) * i / points;
        std::vector<double> row{x, eval_terminal(cfg.problem, x)};
        for (double nv : n_values) {
            SupConvConfig one = sc;
            one.n = nv;
            SupConvResult r = sup_convolve_full(cfg.problem.terminal, cfg.problem.growth, one, x);
            row.push_back(r.value);
            row.push_back(r.certified_gap);
        }
        csv.row(row);
    }
    run.man.constants = {{"n_min", n_values.front()}, {"n_max", n_values.back()}};
    std::cout << "sup-convolved " << n_values.size() << " stiffness value(s) on [" << x_lo << ", "
              << x_hi << "]\n";
    run.finish(true);
}

void cmd_check_assumptions(CommonOpts& opts, long n_samples, double box_half) {
    LoadedConfig cfg = load_config_file(opts.config_path);
    Run run(opts, "check-assumptions", cfg.raw_text);
    std::vector<Assumption> which(cfg.problem.generator.claimed_assumptions.begin(),
                                  cfg.problem.generator.claimed_assumptions.end());
    if (which.empty())
        which = {Assumption::F1, Assumption::F2, Assumption::B1, Assumption::B2a,
                 Assumption::B2b, Assumption::B2c, Assumption::B3, Assumption::TC1,
                 Assumption::TC2};

    SampleBox box;
    box.t_hi = cfg.problem.forward.T;
    box.x_lo = -box_half; box.x_hi = box_half;
    box.y_lo = -box_half; box.y_hi = box_half;
    box.z_lo = -box_half; box.z_hi = box_half;

    CsvWriter csv(run.out("assumptions.csv"));
    csv.header({"assumption", "pass", "worst_margin", "samples", "excluded"});
    bool all_pass = true;
    std::printf("%-6s %-6s %14s %10s %9s\n", "name", "pass", "worst_margin", "samples", "excluded");
    for (Assumption a : which) {
        AssumptionReport rep = check_assumption(cfg.problem, a, box, n_samples, opts.seed);
        all_pass = all_pass && rep.pass;
        std::printf("%-6s %-6s %14.6g %10ld %9ld\n", assumption_name(a).c_str(),
                    rep.pass ? "pass" : "FAIL", rep.worst_margin, rep.samples, rep.excluded);
        csv.mixed_row({assumption_name(a), rep.pass ? "1" : "0",
                       CsvWriter::format(rep.worst_margin), std::to_string(rep.samples),
                       std::to_string(rep.excluded)});
        run.man.constants.emplace_back("margin_" + assumption_name(a), rep.worst_margin);
    }
    run.man.resolutions = {{"samples", std::to_string(n_samples)}};
    run.finish(all_pass);
}

void cmd_fixed_point(CommonOpts& opts, double C, double al, double p, double pbar, double A0,
                     double tol, int max_iter) {
    Run run(opts, "fixed-point", "C=" + std::to_string(C) + " al=" + std::to_string(al) +
                                     " p=" + std::to_string(p) + " pbar=" + std::to_string(pbar));
    RecursionState st;
    st.C_rec = C;
    st.a = al;     // exponent product a*l supplied directly
    st.l = 1.0;
    st.p = p;
    st.p_bar = pbar;
    st.A_n = A0;
    st.B_n = A0;
    st.D_n = A0;
    RecursionResult res = recursion_fixed_point(st, tol, max_iter);

    CsvWriter csv(run.out("fixed_point.csv"));
    csv.header({"iter", "A"});
    std::cout << "iter,A\n";
    for (size_t i = 0; i < res.trace.size(); ++i) {
        csv.row({static_cast<double>(i), res.trace[i]});
        std::cout << i << "," << CsvWriter::format(res.trace[i]) << "\n";
    }
    run.man.constants = {{"A_inf", res.A_inf}, {"iterations", static_cast<double>(res.iterations)}};
    run.finish(true);
}

void cmd_verify(CommonOpts& opts, const std::string& plan_path) {
    ExperimentPlan plan = load_plan_file(plan_path);
    std::ifstream in(plan_path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    Run run(opts, "verify", ss.str());
    if (plan.out_dir.empty()) plan.out_dir = opts.out_dir;
    if (plan.seed == 1) plan.seed = opts.seed;

    VerificationReport rep = run_plan(plan);
    write_report(rep, run.out("report.txt"));
    for (const auto& a : rep.artifacts) run.man.outputs.push_back(a);
    for (const auto& [k, v] : rep.stats) run.man.constants.emplace_back(k, v);
    std::cout << claim_name(rep.claim) << ": " << (rep.pass ? "PASS" : "FAIL") << "\n";
    run.finish(rep.pass);
}

void cmd_report(CommonOpts& opts, const std::vector<std::string>& dirs) {
    Run run(opts, "report", "");
    std::ofstream txt(opts.out_dir + "/summary.txt");
    run.man.outputs.push_back(opts.out_dir + "/summary.txt");
    CsvWriter summary(run.out("summary.csv"));
    summary.header({"run", "subcommand", "pass", "seed", "wall_seconds"});
    CsvWriter longfmt(run.out("long.csv"));
    longfmt.header({"series", "x", "y"});

    bool all_pass = true;
    for (size_t i = 0; i < dirs.size(); ++i) {
        RunManifest m = RunManifest::load(dirs[i] + "/manifest.json");
        all_pass = all_pass && m.pass;
        txt << dirs[i] << "  " << m.subcommand << "  " << (m.pass ? "PASS" : "FAIL") << "\n";
        for (const auto& [k, v] : m.constants)
            txt << "    " << k << " = " << CsvWriter::format(v) << "\n";
        summary.mixed_row({dirs[i], m.subcommand, m.pass ? "1" : "0",
                           std::to_string(m.master_seed), CsvWriter::format(m.wall_seconds)});
        for (const auto& [k, v] : m.constants)
            longfmt.mixed_row({m.subcommand + "." + k, std::to_string(i), CsvWriter::format(v)});
    }
    run.finish(all_pass);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for Markovian superquadratic BSDEs"};
    app.require_subcommand(1);

    CommonOpts sim_o;
    int sim_paths = 0, sim_steps = 0;
    auto* sim = app.add_subcommand("simulate", "forward Euler-Maruyama ensemble + moment check");
    add_common(sim, sim_o);
    sim->add_option("--paths", sim_paths, "override path count");
    sim->add_option("--steps", sim_steps, "override step count");
    sim->callback([&] { cmd_simulate(sim_o, sim_paths, sim_steps); });

    CommonOpts pde_o;
    bool pde_clip = false;
    auto* pde = app.add_subcommand("solve-pde", "finite-difference solve of the associated PDE");
    add_common(pde, pde_o);
    pde->add_flag("--clip", pde_clip, "clamp gradients to a pilot-calibrated envelope");
    pde->callback([&] { cmd_solve_pde(pde_o, pde_clip); });

    CommonOpts mc_o;
    std::string mc_ens;
    auto* mc = app.add_subcommand("solve-mc", "least-squares Monte Carlo backward solve");
    add_common(mc, mc_o);
    mc->add_option("--ensemble", mc_ens, "reuse a cached path ensemble");
    mc->callback([&] { cmd_solve_mc(mc_o, mc_ens); });

    CommonOpts sc_o;
    std::vector<double> sc_n;
    double sc_lo = -5.0, sc_hi = 5.0;
    int sc_points = 200;
    auto* sc = app.add_subcommand("supconv", "sup-convolution of the terminal condition");
    add_common(sc, sc_o);
    sc->add_option("--n", sc_n, "stiffness values (repeatable)");
    sc->add_option("--x-min", sc_lo, "left edge of the output grid");
    sc->add_option("--x-max", sc_hi, "right edge of the output grid");
    sc->add_option("--points", sc_points, "output grid cells");
    sc->callback([&] { cmd_supconv(sc_o, sc_n, sc_lo, sc_hi, sc_points); });

    CommonOpts as_o;
    long as_samples = 20000;
    double as_box = 5.0;
    auto* as = app.add_subcommand("check-assumptions", "sampled structural-assumption margins");
    add_common(as, as_o);
    as->add_option("--samples", as_samples, "sample count per assumption");
    as->add_option("--box", as_box, "half-width of the x/y/z sampling box");
    as->callback([&] { cmd_check_assumptions(as_o, as_samples, as_box); });

    CommonOpts fp_o;
    double fp_C = 1.0, fp_al = 0.5, fp_p = 1.0, fp_pbar = 2.0, fp_A0 = 1.0, fp_tol = 1e-10;
    int fp_max = 1000;
    auto* fp = app.add_subcommand("fixed-point", "bounding-constant recursion trace");
    add_common(fp, fp_o, /*config_required=*/false);
    fp->add_option("--C", fp_C, "recursion constant");
    fp->add_option("--al", fp_al, "exponent product a*l (< 1 to contract)");
    fp->add_option("--p", fp_p, "exponent p");
    fp->add_option("--pbar", fp_pbar, "exponent p-bar");
    fp->add_option("--A0", fp_A0, "starting value");
    fp->add_option("--tol", fp_tol, "convergence tolerance");
    fp->add_option("--max-iter", fp_max, "iteration cap");
    fp->callback([&] { cmd_fixed_point(fp_o, fp_C, fp_al, fp_p, fp_pbar, fp_A0, fp_tol, fp_max); });

    CommonOpts vf_o;
    std::string vf_plan;
    auto* vf = app.add_subcommand("verify", "run an experiment plan and audit its claim");
    vf->add_option("plan", vf_plan, "experiment plan file (JSON)")->required();
    vf->add_option("--seed", vf_o.seed, "master seed")->envname("SUPERBSDE_SEED");
    vf->add_option("--out-dir", vf_o.out_dir, "output directory")->envname("SUPERBSDE_OUT_DIR");
    vf->add_option("--threads", vf_o.threads, "worker thread cap")->envname("SUPERBSDE_THREADS");
    vf->callback([&] { cmd_verify(vf_o, vf_plan); });

    CommonOpts rp_o;
    std::vector<std::string> rp_dirs;
    auto* rp = app.add_subcommand("report", "aggregate run manifests into a summary");
    rp->add_option("dirs", rp_dirs, "run directories containing manifests");
    rp->add_option("--out-dir", rp_o.out_dir, "output directory")->envname("SUPERBSDE_OUT_DIR");
    rp->callback([&] { cmd_report(rp_o, rp_dirs); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return g_exit;
}
