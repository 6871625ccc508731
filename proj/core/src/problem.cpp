#include "superbsde/problem.hpp"
#include "superbsde/errors.hpp"

#include <algorithm>
#include <cmath>

namespace superbsde {

double pow_abs(double v, double e) {
    double a = std::abs(v);
    if (a == 0.0) return e == 0.0 ? 1.0 : 0.0;
    return std::pow(a, e);
}

void GrowthParams::validate() const {
    if (!(l > 1.0))
        throw ConfigError("growth.l must be > 1 (superquadratic regime), got " + std::to_string(l));
    if (r_f < 0.0 || r_f * l >= 1.0)
        throw ConfigError("growth.r_f must lie in [0, 1/l)");
    if (r_g < 0.0 || r_g * l >= 1.0)
        throw ConfigError("growth.r_g must lie in [0, 1/l)");
    if (p_g < 0.0 || !(p_g < 1.0 + 1.0 / l))
        throw ConfigError("growth.p_g must lie in [0, 1+1/l)");
    if (eta < 0.0 || !(eta < l + 1.0))
        throw ConfigError("growth.eta must lie in [0, l+1)");
    if (alpha_bar < 0 || beta_bar < 0 || gamma_bar < 0 || delta_bar < 0 || epsilon < 0 || C_growth < 0)
        throw ConfigError("growth constants must be nonnegative");
}

void GrowthParams::validate_supconv() const {
    validate();
    if (!(p_g * l < 1.0))
        throw ConfigError("sup-convolution workflow requires p_g*l < 1, got p_g*l = " +
                          std::to_string(p_g * l));
}

double ForwardModel::drift(double t, double x) const {
    switch (drift_kind) {
    case DriftKind::Zero: return 0.0;
    case DriftKind::Constant: return drift_c0;
    case DriftKind::Linear: return drift_c0 + drift_slope * x;
    case DriftKind::Custom: return drift_expr.eval(t, x, 0.0, 0.0);
    }
    return 0.0;
}

double ForwardModel::sigma(double t) const {
    switch (sigma_kind) {
    case SigmaKind::Constant: return sigma_c;
    case SigmaKind::Custom: return sigma_expr.eval(t, 0.0, 0.0, 0.0);
    }
    return 0.0;
}

void ForwardModel::validate() const {
    if (dimension != 1)
        throw ConfigError("forward.dimension must be 1 for the in-scope solvers");
    if (!(T > 0.0))
        throw ConfigError("forward.T must be positive");
    if (K_b < 0.0)
        throw ConfigError("forward.K_b must be nonnegative");
    if (drift_kind == DriftKind::Custom && drift_expr.empty())
        throw ConfigError("forward.drift: custom drift needs an expression");
    if (sigma_kind == SigmaKind::Custom && sigma_expr.empty())
        throw ConfigError("forward.sigma: custom sigma needs an expression");
}

void GeneratorSpec::validate(const GrowthParams& growth) const {
    switch (family) {
    case GeneratorFamily::Power:
        if (c_z != 0.0 && !(q > 2.0))
            throw ConfigError("generator.q must be > 2 for superquadratic power families");
        break;
    case GeneratorFamily::Kpz:
        if (!(q > 2.0))
            throw ConfigError("generator.q must be > 2 for the kpz family");
        break;
    case GeneratorFamily::Manufactured:
        if (manu_l != growth.l)
            throw ConfigError("generator.manu_l must equal growth.l");
        break;
    case GeneratorFamily::Custom:
        if (custom.empty())
            throw ConfigError("generator.custom: expression required");
        break;
    }
}

void TerminalSpec::validate(const GrowthParams& growth) const {
    switch (family) {
    case TerminalFamily::Power:
        if (exponent != growth.p_g)
            throw ConfigError("terminal.exponent must equal growth.p_g for the power family");
        break;
    case TerminalFamily::Custom:
        if (custom.empty())
            throw ConfigError("terminal.custom: expression required");
        break;
    case TerminalFamily::Tabulated:
        if (tab_x.size() < 2 || tab_x.size() != tab_v.size())
            throw ConfigError("terminal.tabulated: matching knot/value tables required");
        break;
    default:
        break;
    }
}

void ProblemSpec::validate() const {
    growth.validate();
    forward.validate();
    generator.validate(growth);
    terminal.validate(growth);
}

double manufactured_u(double t, double x) { return std::exp(-t) * std::sin(x); }
double manufactured_ux(double t, double x) { return std::exp(-t) * std::cos(x); }

double manufactured_source(double t, double x, double sigma, double b, double l) {
    // h = -u*_t - 0.5 sigma^2 u*_xx - b u*_x - |sigma u*_x|^{l+1}
    double et = std::exp(-t);
    double ut = -et * std::sin(x);
    double ux = et * std::cos(x);
    double uxx = -et * std::sin(x);
    return -ut - 0.5 * sigma * sigma * uxx - b * ux - pow_abs(sigma * ux, l + 1.0);
}

namespace {

void require_finite(double v, const char* term, double t, double x, double y, double z) {
    if (!std::isfinite(v))
        throw EvaluationError(std::string("generator term '") + term + "' non-finite at (t=" +
                              std::to_string(t) + ", x=" + std::to_string(x) + ", y=" +
                              std::to_string(y) + ", z=" + std::to_string(z) + ")");
}

} // namespace

double eval_generator(const ProblemSpec& p, double t, double x, double y, double z) {
    const GeneratorSpec& f = p.generator;
    switch (f.family) {
    case GeneratorFamily::Power: {
        double vx = f.c_x * pow_abs(x, p.growth.r_f + 1.0);
        require_finite(vx, "c_x|x|^{r_f+1}", t, x, y, z);
        double vz = f.c_z * pow_abs(z, f.q);
        require_finite(vz, "c_z|z|^q", t, x, y, z);
        double vs = f.source.empty() ? 0.0 : f.source.eval(t, x, 0.0, 0.0);
        require_finite(vs, "source", t, x, y, z);
        double v = f.c0 + vx + f.c_y * y + vz + vs;
        require_finite(v, "sum", t, x, y, z);
        return v;
    }
    case GeneratorFamily::Kpz: {
        double v = f.lambda * pow_abs(z, f.q);
        require_finite(v, "lambda|z|^q", t, x, y, z);
        return v;
    }
    case GeneratorFamily::Manufactured: {
        double h = manufactured_source(t, x, f.manu_sigma, f.manu_b, f.manu_l);
        double v = h + pow_abs(z, f.manu_l + 1.0);
        require_finite(v, "h+|z|^{l+1}", t, x, y, z);
        return v;
    }
    case GeneratorFamily::Custom: {
        double v = f.custom.eval(t, x, y, z);
        require_finite(v, "custom", t, x, y, z);
        return v;
    }
    }
    throw EvaluationError("unknown generator family");
}

double eval_terminal(const TerminalSpec& g, double x) {
    if (!std::isfinite(x))
        throw EvaluationError("terminal condition evaluated at non-finite x");
    switch (g.family) {
    case TerminalFamily::Power: return g.scale * pow_abs(x, g.exponent);
    case TerminalFamily::Lipschitz: return g.scale * std::abs(x) + g.offset;
    case TerminalFamily::Linear: return g.scale * x + g.offset;
    case TerminalFamily::Step: return x >= g.at ? g.high : g.low;
    case TerminalFamily::Custom: return g.custom.eval(0.0, x, 0.0, 0.0);
    case TerminalFamily::Tabulated: {
        const auto& xs = g.tab_x;
        const auto& vs = g.tab_v;
        if (xs.size() < 2)
            throw EvaluationError("tabulated terminal needs at least two knots");
        // linear interpolation inside, edge-slope extrapolation outside
        if (x <= xs.front()) {
            double s = (vs[1] - vs[0]) / (xs[1] - xs[0]);
            return vs.front() + s * (x - xs.front());
        }
        if (x >= xs.back()) {
            size_t m = xs.size();
            double s = (vs[m - 1] - vs[m - 2]) / (xs[m - 1] - xs[m - 2]);
            return vs.back() + s * (x - xs.back());
        }
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        size_t hi = static_cast<size_t>(it - xs.begin());
        size_t lo = hi - 1;
        double w = (x - xs[lo]) / (xs[hi] - xs[lo]);
        return (1.0 - w) * vs[lo] + w * vs[hi];
    }
    }
    throw EvaluationError("unknown terminal family");
}

double eval_terminal(const ProblemSpec& p, double x) {
    return eval_terminal(p.terminal, x);
}

} // namespace superbsde
