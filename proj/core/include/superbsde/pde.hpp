#pragma once

#include "superbsde/bounds.hpp"
#include "superbsde/problem.hpp"

#include <optional>
#include <string>
#include <vector>

namespace superbsde {

// IMEX finite-difference oracle for the terminal-value problem
//   -u_t = 0.5 sigma(t)^2 u_xx + b(t,x) u_x + f(t, x, u, sigma(t) u_x),
//   u(T,.) = g,
// so that Y = u(t, X_t) and Z = sigma(t) u_x(t, X_t).
struct PdeConfig {
    double x_min = -6.0, x_max = 6.0;
    int N_x = 200;              // spatial cells (N_x+1 nodes)
    int N_t = 1000;
    std::optional<BoundParams> gradient_clip;   // ZTemporal envelope
    double theta = 1.0;         // implicitness of diffusion (fixed fully implicit)
    bool skip_cfl_check = false;

    static PdeConfig auto_domain(const ProblemSpec& p, int N_x, int N_t, double k = 6.0);
};

struct ValueField {
    double T = 1.0;
    int N_t = 0;
    double x_min = 0.0, x_max = 0.0;
    int N_x = 0;
    std::vector<double> u;    // [(N_t+1) x (N_x+1)], time-major, row k at t_k
    std::vector<double> ux;
    std::vector<unsigned char> clipped;   // 1 where the gradient fed to f was clamped
    long clip_events = 0;
    std::string scheme = "imex-theta1";

    int nodes() const { return N_x + 1; }
    double dt() const { return T / N_t; }
    double dx() const { return (x_max - x_min) / N_x; }
    double t_knot(int k) const { return T * k / N_t; }
    double x_node(int j) const { return x_min + j * dx(); }
    double at(int k, int j) const { return u[static_cast<size_t>(k) * nodes() + j]; }
    double grad_at(int k, int j) const { return ux[static_cast<size_t>(k) * nodes() + j]; }
    bool clipped_at(int k, int j) const { return clipped[static_cast<size_t>(k) * nodes() + j] != 0; }

    // nearest-node lookups
    double value(double t, double x) const;
    double gradient(double t, double x) const;
};

ValueField solve_pde(const ProblemSpec& p, const PdeConfig& cfg);

struct RateFit {
    double exponent = 0.0;
    double r_squared = 0.0;
    int samples = 0;
};

// Fits log max_x |u_x(t,.)| against log(T-t) over the window
// [T - window_hi, T - window_lo]; the last two time steps are always
// excluded, as are the grid cells straddling kink_x when given.
RateFit extract_rate_near_T(const ValueField& field, double window_lo, double window_hi,
                            std::optional<double> kink_x = std::nullopt);

} // namespace superbsde
