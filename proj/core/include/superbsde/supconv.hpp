#pragma once

#include "superbsde/problem.hpp"

namespace superbsde {

// Sup-convolution g_n(x) = sup_u { g(u) - n|x-u| }, approximated on a
// finite candidate grid with a certified discretization gap.
struct SupConvConfig {
    double n = 1.0;                  // convolution stiffness
    double search_radius_factor = 1.0;
    double h_u = 1e-3;               // candidate grid step
    bool refine = false;             // golden-section pass in the best cell
};

struct SupConvResult {
    double value = 0.0;          // \hat g_n(x)
    double certified_gap = 0.0;  // (n + L_loc) * h_u / 2
    double radius = 0.0;         // bracketing radius actually used
    double argmax_u = 0.0;
};

// Smooth modification of the projection onto [-M, M]: identity for
// |x| <= M-1, cubic Hermite transition on M-1 < |x| < M+1, saturated at M.
struct SmoothProjection {
    double M = 5.0;
};

double smooth_project(const SmoothProjection& rho, double x);

// Smallest grid-certifiable n_0 such that the sup-convolution is attained
// in a finite radius for every n >= n_0 (slope supremum of the growth
// envelope C + alpha_bar |u|^{p_g} over the box, plus 1).
double admissible_n0(const TerminalSpec& g, const GrowthParams& growth,
                     double box_lo = -10.0, double box_hi = 10.0);

SupConvResult sup_convolve_full(const TerminalSpec& g, const GrowthParams& growth,
                                const SupConvConfig& cfg, double x);

double sup_convolve(const TerminalSpec& g, const GrowthParams& growth,
                    const SupConvConfig& cfg, double x);

} // namespace superbsde
