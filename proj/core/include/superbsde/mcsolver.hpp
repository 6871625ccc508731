#pragma once

#include "superbsde/bounds.hpp"
#include "superbsde/forward.hpp"
#include "superbsde/problem.hpp"

#include <optional>
#include <vector>

namespace superbsde {

// Piecewise-constant regression over quantile bins of the state.
struct RegressionBasis {
    int bins = 40;
    int min_paths_per_bin = 50;
};

struct BackwardSolution {
    TimeGrid grid;
    int n_paths = 0;
    std::vector<double> Y;    // [knot * n_paths + path]
    std::vector<double> Z;    // [step * n_paths + path], steps 0..N-1
    double y0 = 0.0;
    double y0_se = 0.0;
    std::optional<BoundParams> truncation;
    std::vector<double> clip_fraction;   // per step
    std::vector<double> regression_residual;  // per step, rms within-bin spread of Y_{i+1}

    double y(int knot, int path) const { return Y[static_cast<size_t>(knot) * n_paths + path]; }
    double z(int step, int path) const { return Z[static_cast<size_t>(step) * n_paths + path]; }
    double total_clip_fraction() const;
};

BackwardSolution solve_mc(const ProblemSpec& p, const PathEnsemble& ens,
                          const RegressionBasis& basis,
                          const std::optional<BoundParams>& trunc = std::nullopt);

struct ContinuityProbeReport {
    std::vector<double> probe_times;   // T' values (grid knots)
    std::vector<double> gaps;          // mean |Y_{T'} - g(X_T)|
    double fitted_decay = 0.0;         // slope of log gap vs log (T - T')
    bool monotone_tail = false;        // decreasing over the last 4 probes
    bool fit_ok = true;
    std::string note;
};

// Terminal continuity along one backward solve: mean |Y_{T'} - g(X_T)| for
// probe times T' increasing to T.
ContinuityProbeReport terminal_continuity_probe(const ProblemSpec& p, const PathEnsemble& ens,
                                                const RegressionBasis& basis,
                                                const std::vector<double>& probe_times,
                                                const std::optional<BoundParams>& trunc = std::nullopt);

} // namespace superbsde
