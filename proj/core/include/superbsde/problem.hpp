#pragma once

#include "superbsde/expr.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace superbsde {

// Growth/regularity exponents and constants of the driver and terminal
// condition.  l > 1 is the superquadratic exponent; r_f, r_g, p_g control
// the x-growth; the barred constants parameterize the growth sandwich and
// the plain alpha..delta the local-Lipschitz moduli when claimed.
struct GrowthParams {
    double l = 2.0;
    double r_f = 0.0;
    double r_g = 0.0;
    double p_g = 0.0;
    double alpha_bar = 0.0;
    double beta_bar = 0.0;
    double gamma_bar = 0.0;
    double delta_bar = 0.0;
    double epsilon = 0.0;
    double eta = 0.0;
    double C_growth = 0.0;

    // optional Lipschitz-flavor constants
    std::optional<double> alpha;
    std::optional<double> beta;
    std::optional<double> gamma;
    std::optional<double> delta;

    void validate() const;              // l>1, r_f l<1, r_g l<1, p_g<1+1/l
    void validate_supconv() const;      // additionally p_g l < 1
};

enum class DriftKind { Zero, Constant, Linear, Custom };
enum class SigmaKind { Constant, Custom };

// Forward SDE: dX = b(t,x) dt + sigma(t) dW.  sigma depends on t only.
struct ForwardModel {
    int dimension = 1;
    double x0 = 0.0;
    double T = 1.0;

    DriftKind drift_kind = DriftKind::Zero;
    double drift_c0 = 0.0;      // Constant: b = c0; Linear: b = c0 + slope*x
    double drift_slope = 0.0;
    Expr drift_expr;            // Custom: expression in (t,x)

    SigmaKind sigma_kind = SigmaKind::Constant;
    double sigma_c = 1.0;
    Expr sigma_expr;            // Custom: expression in t

    double K_b = 0.0;           // declared Lipschitz constant of the drift
    double lambda_F2 = 0.0;

    double drift(double t, double x) const;
    double sigma(double t) const;
    void validate() const;
};

enum class GeneratorFamily { Power, Kpz, Manufactured, Custom };
enum class Assumption { F1, F2, B1, B2a, B2b, B2c, B3, TC1, TC2 };

// Driver families.
//   power:        f = c0 + c_x|x|^{r_f+1} + c_y*y + c_z|z|^q + source(t,x)
//   kpz:          f = lambda |z|^q
//   manufactured: f = h(t,x) + |z|^{l+1} with h chosen so that
//                 u*(t,x) = e^{-t} sin(x) solves the associated PDE with
//                 constant coefficients sigma_const, b_const
//   custom:       arbitrary expression in (t,x,y,z)
struct GeneratorSpec {
    GeneratorFamily family = GeneratorFamily::Kpz;

    double c0 = 0.0, c_x = 0.0, c_y = 0.0, c_z = 0.0, q = 3.0;  // power
    Expr source;                                                // power, optional
    double lambda = 1.0;                                        // kpz (shares q)
    double manu_sigma = 1.0, manu_b = 0.0, manu_l = 2.0;        // manufactured
    Expr custom;

    std::set<Assumption> claimed_assumptions;

    void validate(const GrowthParams& growth) const;
};

enum class TerminalFamily { Power, Lipschitz, Linear, Step, Custom, Tabulated };

// Terminal conditions.
//   power:     g = scale |x|^{p_g}
//   lipschitz: g = scale |x| + offset
//   linear:    g = scale * x
//   step:      g = low for x < at, high for x >= at (upper value at the jump)
//   custom:    expression in x
//   tabulated: piecewise-linear table (solver-internal, e.g. sup-convolved g)
struct TerminalSpec {
    TerminalFamily family = TerminalFamily::Linear;
    double scale = 1.0;
    double offset = 0.0;
    double exponent = 0.5;      // power family
    double low = 0.0, high = 1.0, at = 0.0;  // step family
    Expr custom;
    std::vector<double> tab_x, tab_v;   // tabulated family, tab_x strictly increasing
    bool lsc_flag = true;

    void validate(const GrowthParams& growth) const;
};

struct ProblemSpec {
    ForwardModel forward;
    GeneratorSpec generator;
    TerminalSpec terminal;
    GrowthParams growth;
    std::string label;

    void validate() const;
};

// f(t,x,y,z); throws EvaluationError when a term is non-finite.
double eval_generator(const ProblemSpec& p, double t, double x, double y, double z);

// g(x)
double eval_terminal(const ProblemSpec& p, double x);
double eval_terminal(const TerminalSpec& g, double x);

// |v|^e with the 0^0 = 1, 0^{positive} = 0 convention
double pow_abs(double v, double e);

// The manufactured solution u*(t,x) = e^{-t} sin(x) and its source term h.
double manufactured_u(double t, double x);
double manufactured_ux(double t, double x);
double manufactured_source(double t, double x, double sigma, double b, double l);

} // namespace superbsde
