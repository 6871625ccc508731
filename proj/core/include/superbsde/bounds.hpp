#pragma once

#include "superbsde/problem.hpp"

#include <string>
#include <vector>

namespace superbsde {

enum class BoundKind { ZLipschitz, YGrowth, ZIntegral, ZTemporal };
enum class Calibration { Analytic, PilotPde, PilotMc };

// A priori estimate with its constants.  The shapes are fixed by the
// estimates; the constants are calibrated per problem and carry their
// provenance.
struct BoundParams {
    BoundKind kind = BoundKind::YGrowth;
    double A = 0.0, B = 0.0, C = 0.0, D = 0.0;
    double T = 1.0;
    // exponents copied from the problem's GrowthParams
    double l = 2.0, r_f = 0.0, r_g = 0.0, p_g = 0.0;
    Calibration calibration = Calibration::Analytic;
    std::string calibrated_at;   // timestamp / provenance note

    static BoundParams from_growth(BoundKind kind, const GrowthParams& g, double T);
};

// |Z_t| <= A + B(|x|^{r_g} + (T-t)|x|^{r_f})
double z_bound_lipschitz(const BoundParams& bp, double t, double x);

// |Y_t| <= C(1 + |x|^{p_g} + (T-t)|x|^{r_f+1})
double y_bound(const BoundParams& bp, double t, double x);

// E_t[int_t^T |Z|^{l+1}] <= C(1 + |x|^{p_g} + (T-t)|x|^{r_f+1})
double z_integral_bound(const BoundParams& bp, double t, double x);

// |Z_t| <= C(1 + |x|^{p_g/(l+1)})/(T-t)^{1/(l+1)} + C|x|^{(r_f+1)/(l+1)}, t < T
double z_temporal_bound(const BoundParams& bp, double t, double x);

// A_{n+1} = C(1 + A_n^{al} + B_n^{alp} + D_n^{al pbar}); B, D pinned to C
// after the first step.  Contracts when a*l < 1.
struct RecursionState {
    double A_n = 0.0, B_n = 0.0, D_n = 0.0;
    double C_rec = 1.0;
    double a = 0.25, l = 2.0, p = 1.0, p_bar = 2.0;
    int n = 0;
};

struct RecursionResult {
    double A_inf = 0.0;
    int iterations = 0;
    std::vector<double> trace;   // A_0, A_1, ...
};

RecursionResult recursion_fixed_point(const RecursionState& init, double tol, int max_iter);

// Lemma 3.4 default p = 1/(1 - l p_g/(l+1)); pbar defaults to 2
double recursion_default_p(double l, double p_g);

struct SampleBox {
    double t_lo = 0.0, t_hi = 1.0;
    double x_lo = -5.0, x_hi = 5.0;
    double y_lo = -5.0, y_hi = 5.0;
    double z_lo = -5.0, z_hi = 5.0;
};

struct AssumptionReport {
    Assumption which = Assumption::B3;
    bool pass = false;
    double worst_margin = 0.0;   // min over samples of (rhs - lhs); negative = violation
    double witness[4] = {0, 0, 0, 0};  // (t, x, y, z) achieving the worst margin
    double witness2[4] = {0, 0, 0, 0}; // second point for increment conditions
    long samples = 0;
    long excluded = 0;           // samples skipped near gradient kinks
    std::string note;
};

// Samples the assumption inequality with the constants declared in the
// problem's GrowthParams / ForwardModel; gradients by central differences
// with step 1e-5 * (1 + |z|).
AssumptionReport check_assumption(const ProblemSpec& p, Assumption which,
                                  const SampleBox& box, long n_samples,
                                  std::uint64_t seed = 12345);

std::string assumption_name(Assumption a);
bool parse_assumption(const std::string& s, Assumption& out);

} // namespace superbsde
