#include "superbsde/config.hpp"
#include "superbsde/errors.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

namespace superbsde {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& path, const std::string& what) {
    throw ConfigError("config error at " + path + ": " + what);
}

double need_num(const json& j, const std::string& path, const std::string& key) {
    if (!j.contains(key)) bad(path + "." + key, "missing required number");
    if (!j[key].is_number()) bad(path + "." + key, "expected a number");
    return j[key].get<double>();
}

double opt_num(const json& j, const std::string& path, const std::string& key, double def) {
    if (!j.contains(key)) return def;
    if (!j[key].is_number()) bad(path + "." + key, "expected a number");
    return j[key].get<double>();
}

std::string need_str(const json& j, const std::string& path, const std::string& key) {
    if (!j.contains(key)) bad(path + "." + key, "missing required string");
    if (!j[key].is_string()) bad(path + "." + key, "expected a string");
    return j[key].get<std::string>();
}

std::string opt_str(const json& j, const std::string& path, const std::string& key,
                    const std::string& def) {
    if (!j.contains(key)) return def;
    if (!j[key].is_string()) bad(path + "." + key, "expected a string");
    return j[key].get<std::string>();
}

Expr parse_expr(const std::string& text, const std::string& path) {
    try {
        return Expr::parse(text);
    } catch (const ConfigError& e) {
        bad(path, e.what());
    }
}

GrowthParams parse_growth(const json& j, const std::string& path) {
    GrowthParams g;
    g.l = need_num(j, path, "l");
    g.r_f = opt_num(j, path, "r_f", 0.0);
    g.r_g = opt_num(j, path, "r_g", 0.0);
    g.p_g = opt_num(j, path, "p_g", 0.0);
    g.alpha_bar = opt_num(j, path, "alpha_bar", 0.0);
    g.beta_bar = opt_num(j, path, "beta_bar", 0.0);
    g.gamma_bar = opt_num(j, path, "gamma_bar", 0.0);
    g.delta_bar = opt_num(j, path, "delta_bar", 0.0);
    g.epsilon = opt_num(j, path, "epsilon", 0.0);
    g.eta = opt_num(j, path, "eta", 0.0);
    g.C_growth = opt_num(j, path, "C_growth", 0.0);
    if (j.contains("alpha")) g.alpha = need_num(j, path, "alpha");
    if (j.contains("beta")) g.beta = need_num(j, path, "beta");
    if (j.contains("gamma")) g.gamma = need_num(j, path, "gamma");
    if (j.contains("delta")) g.delta = need_num(j, path, "delta");
    return g;
}

ForwardModel parse_forward(const json& j, const std::string& path) {
    ForwardModel m;
    m.dimension = static_cast<int>(opt_num(j, path, "dimension", 1));
    m.x0 = opt_num(j, path, "x0", 0.0);
    m.T = need_num(j, path, "T");
    m.K_b = opt_num(j, path, "K_b", 0.0);
    m.lambda_F2 = opt_num(j, path, "lambda_F2", 0.0);

    if (j.contains("drift")) {
        const json& d = j["drift"];
        std::string dp = path + ".drift";
        std::string kind = need_str(d, dp, "kind");
        if (kind == "zero") m.drift_kind = DriftKind::Zero;
        else if (kind == "constant") { m.drift_kind = DriftKind::Constant; m.drift_c0 = need_num(d, dp, "c0"); }
        else if (kind == "linear") {
            m.drift_kind = DriftKind::Linear;
            m.drift_c0 = opt_num(d, dp, "c0", 0.0);
            m.drift_slope = need_num(d, dp, "slope");
        } else if (kind == "custom") {
            m.drift_kind = DriftKind::Custom;
            m.drift_expr = parse_expr(need_str(d, dp, "expr"), dp + ".expr");
        } else bad(dp + ".kind", "unknown drift kind '" + kind + "'");
    }
    if (j.contains("sigma")) {
        const json& s = j["sigma"];
        std::string sp = path + ".sigma";
        if (s.is_number()) { m.sigma_kind = SigmaKind::Constant; m.sigma_c = s.get<double>(); }
        else {
            std::string kind = need_str(s, sp, "kind");
            if (kind == "constant") { m.sigma_kind = SigmaKind::Constant; m.sigma_c = need_num(s, sp, "value"); }
            else if (kind == "custom") {
                m.sigma_kind = SigmaKind::Custom;
                m.sigma_expr = parse_expr(need_str(s, sp, "expr"), sp + ".expr");
            } else bad(sp + ".kind", "unknown sigma kind '" + kind + "'");
        }
    }
    return m;
}

GeneratorSpec parse_generator(const json& j, const std::string& path) {
    GeneratorSpec g;
    std::string family = need_str(j, path, "family");
    if (family == "power") {
        g.family = GeneratorFamily::Power;
        g.c0 = opt_num(j, path, "c0", 0.0);
        g.c_x = opt_num(j, path, "c_x", 0.0);
        g.c_y = opt_num(j, path, "c_y", 0.0);
        g.c_z = opt_num(j, path, "c_z", 0.0);
        g.q = opt_num(j, path, "q", 3.0);
        if (j.contains("source"))
            g.source = parse_expr(need_str(j, path, "source"), path + ".source");
    } else if (family == "kpz") {
        g.family = GeneratorFamily::Kpz;
        g.lambda = opt_num(j, path, "lambda", 1.0);
        g.q = opt_num(j, path, "q", 3.0);
    } else if (family == "manufactured") {
        g.family = GeneratorFamily::Manufactured;
        g.manu_sigma = opt_num(j, path, "sigma", 1.0);
        g.manu_b = opt_num(j, path, "b", 0.0);
        g.manu_l = opt_num(j, path, "l", 2.0);
    } else if (family == "custom") {
        g.family = GeneratorFamily::Custom;
        g.custom = parse_expr(need_str(j, path, "expr"), path + ".expr");
    } else bad(path + ".family", "unknown generator family '" + family + "'");

    if (j.contains("claimed_assumptions")) {
        if (!j["claimed_assumptions"].is_array())
            bad(path + ".claimed_assumptions", "expected an array of assumption names");
        for (const auto& a : j["claimed_assumptions"]) {
            Assumption which;
            if (!a.is_string() || !parse_assumption(a.get<std::string>(), which))
                bad(path + ".claimed_assumptions", "unknown assumption name");
            g.claimed_assumptions.insert(which);
        }
    }
    return g;
}

TerminalSpec parse_terminal(const json& j, const std::string& path) {
    TerminalSpec t;
    std::string family = need_str(j, path, "family");
    if (family == "power") {
        t.family = TerminalFamily::Power;
        t.scale = opt_num(j, path, "scale", 1.0);
        t.exponent = need_num(j, path, "exponent");
    } else if (family == "lipschitz") {
        t.family = TerminalFamily::Lipschitz;
        t.scale = opt_num(j, path, "scale", 1.0);
        t.offset = opt_num(j, path, "offset", 0.0);
    } else if (family == "linear") {
        t.family = TerminalFamily::Linear;
        t.scale = need_num(j, path, "scale");
        t.offset = opt_num(j, path, "offset", 0.0);
    } else if (family == "step") {
        t.family = TerminalFamily::Step;
        t.low = opt_num(j, path, "low", 0.0);
        t.high = opt_num(j, path, "high", 1.0);
        t.at = opt_num(j, path, "at", 0.0);
    } else if (family == "custom") {
        t.family = TerminalFamily::Custom;
        t.custom = parse_expr(need_str(j, path, "expr"), path + ".expr");
    } else bad(path + ".family", "unknown terminal family '" + family + "'");
    if (j.contains("lsc")) {
        if (!j["lsc"].is_boolean()) bad(path + ".lsc", "expected a boolean");
        t.lsc_flag = j["lsc"].get<bool>();
    }
    return t;
}

} // namespace

LoadedConfig parse_config_text(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::exception& e) {
        throw ConfigError("config " + origin + " is not valid JSON: " + e.what());
    }
    if (!j.contains("problem"))
        throw ConfigError("config error at problem: missing required object");
    const json& p = j["problem"];

    LoadedConfig cfg;
    cfg.raw_text = text;
    if (!p.contains("forward")) throw ConfigError("config error at problem.forward: missing required object");
    if (!p.contains("generator")) throw ConfigError("config error at problem.generator: missing required object");
    if (!p.contains("terminal")) throw ConfigError("config error at problem.terminal: missing required object");
    if (!p.contains("growth")) throw ConfigError("config error at problem.growth: missing required object");
    cfg.problem.forward = parse_forward(p["forward"], "problem.forward");
    cfg.problem.generator = parse_generator(p["generator"], "problem.generator");
    cfg.problem.terminal = parse_terminal(p["terminal"], "problem.terminal");
    cfg.problem.growth = parse_growth(p["growth"], "problem.growth");
    cfg.problem.label = opt_str(p, "problem", "label", "");
    cfg.problem.validate();

    if (j.contains("pde")) {
        const json& q = j["pde"];
        cfg.has_pde = true;
        cfg.pde.N_x = static_cast<int>(opt_num(q, "pde", "N_x", 200));
        cfg.pde.N_t = static_cast<int>(opt_num(q, "pde", "N_t", 1000));
        if (q.contains("x_min") || q.contains("x_max")) {
            cfg.pde.x_min = need_num(q, "pde", "x_min");
            cfg.pde.x_max = need_num(q, "pde", "x_max");
        } else {
            PdeConfig ad = PdeConfig::auto_domain(cfg.problem, cfg.pde.N_x, cfg.pde.N_t,
                                                  opt_num(q, "pde", "domain_k", 6.0));
            cfg.pde.x_min = ad.x_min;
            cfg.pde.x_max = ad.x_max;
        }
    }
    if (j.contains("mc")) {
        const json& q = j["mc"];
        cfg.has_mc = true;
        cfg.mc_paths = static_cast<int>(opt_num(q, "mc", "paths", 10000));
        cfg.mc_steps = static_cast<int>(opt_num(q, "mc", "steps", 50));
        cfg.mc_basis.bins = static_cast<int>(opt_num(q, "mc", "bins", 40));
        cfg.mc_basis.min_paths_per_bin = static_cast<int>(opt_num(q, "mc", "min_paths_per_bin", 50));
        if (q.contains("truncate")) {
            if (!q["truncate"].is_boolean()) throw ConfigError("config error at mc.truncate: expected a boolean");
            cfg.mc_truncate = q["truncate"].get<bool>();
        }
    }
    if (j.contains("supconv")) {
        const json& q = j["supconv"];
        cfg.has_supconv = true;
        cfg.supconv.n = opt_num(q, "supconv", "n", 1.0);
        cfg.supconv.h_u = opt_num(q, "supconv", "h_u", 1e-3);
        cfg.supconv.search_radius_factor = opt_num(q, "supconv", "search_radius_factor", 1.0);
        if (q.contains("refine")) cfg.supconv.refine = q["refine"].get<bool>();
    }
    return cfg;
}

LoadedConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

} // namespace superbsde
