#include "superbsde/forward.hpp"
#include "superbsde/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <thread>

namespace superbsde {

namespace {

std::uint64_t splitmix64(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::atomic<int> g_max_threads{0};

} // namespace

void set_max_threads(int n) { g_max_threads.store(n < 0 ? 0 : n); }
int max_threads() { return g_max_threads.load(); }

std::uint64_t substream_seed(std::uint64_t master_seed, std::uint64_t path_index) {
    std::uint64_t s = master_seed;
    std::uint64_t a = splitmix64(s);
    s ^= path_index * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL;
    return a ^ splitmix64(s);
}

double GaussianStream::next_uniform() {
    // top 53 bits of splitmix64, mapped into (0,1)
    std::uint64_t r = splitmix64(state_);
    return (static_cast<double>(r >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

double GaussianStream::next() {
    if (have_spare_) { have_spare_ = false; return spare_; }
    double u1 = next_uniform();
    double u2 = next_uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
}

PathEnsemble simulate(const ForwardModel& model, const TimeGrid& grid,
                      int n_paths, std::uint64_t master_seed) {
    if (n_paths < 1)
        throw ConfigError("simulate: n_paths must be >= 1");
    PathEnsemble ens;
    ens.grid = grid;
    ens.n_paths = n_paths;
    ens.master_seed = master_seed;
    ens.paths.resize(static_cast<size_t>(n_paths) * grid.knots());
    ens.increments.resize(static_cast<size_t>(n_paths) * grid.N);

    const double dt = grid.dt();
    const double sqdt = std::sqrt(dt);

    // sigma depends on t only; precompute per knot
    std::vector<double> sig(grid.N);
    for (int i = 0; i < grid.N; ++i) {
        sig[i] = model.sigma(grid.knot(i));
        if (!std::isfinite(sig[i]))
            throw SimulationError("non-finite volatility at t = " + std::to_string(grid.knot(i)));
    }

    auto run_chunk = [&](int p_begin, int p_end) {
        for (int p = p_begin; p < p_end; ++p) {
            GaussianStream rng(substream_seed(master_seed, static_cast<std::uint64_t>(p)));
            double xv = model.x0;
            ens.paths[static_cast<size_t>(p) * grid.knots()] = xv;
            for (int i = 0; i < grid.N; ++i) {
                double b = model.drift(grid.knot(i), xv);
                if (!std::isfinite(b))
                    throw SimulationError("non-finite drift at (t = " + std::to_string(grid.knot(i)) +
                                          ", path " + std::to_string(p) + ")");
                double dw = sqdt * rng.next();
                ens.increments[static_cast<size_t>(p) * grid.N + i] = dw;
                xv += b * dt + sig[i] * dw;
                ens.paths[static_cast<size_t>(p) * grid.knots() + i + 1] = xv;
            }
        }
    };

    unsigned hw = std::thread::hardware_concurrency();
    int cap = max_threads();
    if (cap > 0) hw = std::min<unsigned>(hw, static_cast<unsigned>(cap));
    unsigned workers = std::min<unsigned>(hw, static_cast<unsigned>(n_paths));
    if (workers <= 1 || n_paths < 4096) {
        run_chunk(0, n_paths);
    } else {
        std::vector<std::thread> pool;
        int chunk = (n_paths + static_cast<int>(workers) - 1) / static_cast<int>(workers);
        std::exception_ptr err;
        for (unsigned w = 0; w < workers; ++w) {
            int lo = static_cast<int>(w) * chunk;
            int hi = std::min(n_paths, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back([&, lo, hi] {
                try { run_chunk(lo, hi); }
                catch (...) { err = std::current_exception(); }
            });
        }
        for (auto& th : pool) th.join();
        if (err) std::rethrow_exception(err);
    }
    return ens;
}

MomentCheckReport conditional_moment_check(const PathEnsemble& ens, double p,
                                           int bins, int min_paths_per_bin) {
    if (ens.n_paths == 0)
        throw InsufficientDataError("conditional_moment_check: empty ensemble");
    const int mid = ens.grid.N / 2;
    const int K = ens.grid.knots();

    std::vector<int> order(ens.n_paths);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return ens.x(a, mid) < ens.x(b, mid);
    });

    // degenerate ensembles (sigma = 0) collapse to one bin
    double spread = ens.x(order.back(), mid) - ens.x(order.front(), mid);
    int nb = spread < 1e-14 ? 1 : bins;

    double sum_me = 0.0, sum_ee = 0.0, max_ratio = 0.0;
    for (int b = 0; b < nb; ++b) {
        int lo = static_cast<int>(static_cast<long>(b) * ens.n_paths / nb);
        int hi = static_cast<int>(static_cast<long>(b + 1) * ens.n_paths / nb);
        if (hi - lo < min_paths_per_bin)
            throw InsufficientDataError("conditional_moment_check: bin " + std::to_string(b) +
                                        " has " + std::to_string(hi - lo) + " paths (< " +
                                        std::to_string(min_paths_per_bin) + ")");
        double m = 0.0, center = 0.0;
        for (int k = lo; k < hi; ++k) {
            int path = order[k];
            double sup = 0.0;
            for (int i = mid; i < K; ++i)
                sup = std::max(sup, std::abs(ens.x(path, i)));
            m += pow_abs(sup, p);
            center += ens.x(path, mid);
        }
        m /= (hi - lo);
        center /= (hi - lo);
        double env = 1.0 + pow_abs(center, p);
        sum_me += m * env;
        sum_ee += env * env;
        max_ratio = std::max(max_ratio, m / env);
    }

    MomentCheckReport rep;
    rep.p = p;
    rep.fitted_C = sum_me / sum_ee;
    rep.max_bin_ratio = max_ratio;
    rep.bins = nb;
    return rep;
}

namespace {
constexpr std::uint64_t kCacheMagic = 0x5342534445454e53ULL; // "SBSDEENS"
}

void save_ensemble(const PathEnsemble& ens, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("cannot open ensemble cache for writing: " + path);
    auto put_u64 = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); };
    auto put_f64 = [&](double v) { out.write(reinterpret_cast<const char*>(&v), 8); };
    put_u64(kCacheMagic);
    put_u64(ens.master_seed);
    put_u64(static_cast<std::uint64_t>(ens.grid.N));
    put_u64(static_cast<std::uint64_t>(ens.n_paths));
    put_f64(ens.grid.T);
    out.write(reinterpret_cast<const char*>(ens.paths.data()),
              static_cast<std::streamsize>(ens.paths.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(ens.increments.data()),
              static_cast<std::streamsize>(ens.increments.size() * sizeof(double)));
    if (!out)
        throw ConfigError("short write to ensemble cache: " + path);
}

PathEnsemble load_ensemble(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open ensemble cache: " + path);
    auto get_u64 = [&] { std::uint64_t v = 0; in.read(reinterpret_cast<char*>(&v), 8); return v; };
    auto get_f64 = [&] { double v = 0; in.read(reinterpret_cast<char*>(&v), 8); return v; };
    if (get_u64() != kCacheMagic)
        throw ConfigError("not an ensemble cache file: " + path);
    PathEnsemble ens;
    ens.master_seed = get_u64();
    ens.grid.N = static_cast<int>(get_u64());
    ens.n_paths = static_cast<int>(get_u64());
    ens.grid.T = get_f64();
    ens.paths.resize(static_cast<size_t>(ens.n_paths) * ens.grid.knots());
    ens.increments.resize(static_cast<size_t>(ens.n_paths) * ens.grid.N);
    in.read(reinterpret_cast<char*>(ens.paths.data()),
            static_cast<std::streamsize>(ens.paths.size() * sizeof(double)));
    in.read(reinterpret_cast<char*>(ens.increments.data()),
            static_cast<std::streamsize>(ens.increments.size() * sizeof(double)));
    if (!in)
        throw ConfigError("truncated ensemble cache: " + path);
    return ens;
}

} // namespace superbsde
