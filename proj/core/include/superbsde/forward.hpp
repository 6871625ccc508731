#pragma once

#include "superbsde/problem.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace superbsde {

struct TimeGrid {
    double T = 1.0;
    int N = 100;                  // number of steps; knots t_i = i*T/N

    double dt() const { return T / N; }
    double knot(int i) const { return T * i / N; }
    int knots() const { return N + 1; }
};

// Seeded ensemble of Euler-Maruyama paths.  Each path draws from its own
// substream keyed by (master_seed, path_index) so that worker scheduling
// cannot change the output.
struct PathEnsemble {
    TimeGrid grid;
    int n_paths = 0;
    std::uint64_t master_seed = 0;
    std::vector<double> paths;       // [path * knots + knot]
    std::vector<double> increments;  // [path * N + step]

    double x(int path, int knot) const { return paths[static_cast<size_t>(path) * grid.knots() + knot]; }
    double dw(int path, int step) const { return increments[static_cast<size_t>(path) * grid.N + step]; }
};

PathEnsemble simulate(const ForwardModel& model, const TimeGrid& grid,
                      int n_paths, std::uint64_t master_seed);

// process-wide worker cap for simulate (0 = hardware concurrency)
void set_max_threads(int n);
int max_threads();

struct MomentCheckReport {
    double p = 1.0;
    double fitted_C = 0.0;       // least-squares fit of E[sup|X|^p | bin] ~ C(1+|x_bin|^p)
    double max_bin_ratio = 0.0;
    int bins = 0;
};

// E[sup_{t<=s<=T} |X_s|^p | X_t in bin] over quantile bins of X at the
// mid-horizon knot, fitted against C(1+|X_t|^p).
MomentCheckReport conditional_moment_check(const PathEnsemble& ens, double p,
                                           int bins = 10, int min_paths_per_bin = 50);

// binary cache (little-endian doubles, path-major)
void save_ensemble(const PathEnsemble& ens, const std::string& path);
PathEnsemble load_ensemble(const std::string& path);

// deterministic per-path substream
std::uint64_t substream_seed(std::uint64_t master_seed, std::uint64_t path_index);

class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}
    double next();               // standard normal

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
    double next_uniform();       // (0,1)
};

} // namespace superbsde
