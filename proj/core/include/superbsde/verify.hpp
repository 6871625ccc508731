#pragma once

#include "superbsde/bounds.hpp"
#include "superbsde/mcsolver.hpp"
#include "superbsde/pde.hpp"
#include "superbsde/problem.hpp"
#include "superbsde/supconv.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace superbsde {

enum class Claim {
    Comparison,
    YEnvelope,
    ZEnvelope,
    ZIntegral,
    SupconvMonotone,
    BlowupRate,
    TerminalContinuity,
    TruncationInertness,
};

std::string claim_name(Claim c);
bool parse_claim(const std::string& s, Claim& out);

struct Resolution {
    int paths = 20000;
    int steps = 50;
    int bins = 20;
    int pde_nx = 200;
    int pde_nt = 1000;
};

struct ExperimentPlan {
    Claim claim = Claim::Comparison;
    std::vector<ProblemSpec> problems;     // 1 or 2 depending on the claim
    std::vector<Resolution> resolutions;
    std::uint64_t seed = 1;
    std::vector<double> n_list;            // supconv ladder stiffnesses
    std::string out_dir;                   // artifact directory; empty = none
    double rate_window_lo = 0.01;          // blow-up fit window in T - t
    double rate_window_hi = 0.25;

    void validate() const;
};

struct VerificationReport {
    Claim claim = Claim::Comparison;
    bool pass = false;
    std::vector<std::pair<std::string, double>> stats;
    std::vector<std::pair<std::string, double>> tolerances;
    std::vector<std::string> artifacts;
    std::string note;

    double stat(const std::string& name) const;
    void add(const std::string& name, double v) { stats.emplace_back(name, v); }
    void tol(const std::string& name, double v) { tolerances.emplace_back(name, v); }
};

// Pilot-PDE calibration of an a priori bound: max over the interior grid
// of measured / shape, times a 1.5 safety factor.  For ZTemporal the last
// two time knots are excluded.
BoundParams calibrate_bound_from_pde(const ProblemSpec& p, BoundKind kind,
                                     const ValueField& field, double safety = 1.5);

VerificationReport run_comparison(const ProblemSpec& p1, const ProblemSpec& p2,
                                  const ExperimentPlan& plan);
VerificationReport run_envelope_audit(const ProblemSpec& p, const BoundParams& bp,
                                      const ExperimentPlan& plan);
VerificationReport run_supconv_ladder(const ProblemSpec& p, const std::vector<double>& n_list,
                                      const ExperimentPlan& plan);
VerificationReport run_blowup_rate(const ProblemSpec& p, const ExperimentPlan& plan);
VerificationReport run_truncation_inertness(const ProblemSpec& p, const ExperimentPlan& plan);
VerificationReport run_terminal_continuity(const ProblemSpec& p, const ExperimentPlan& plan);

// dispatch on plan.claim (envelope claims audit the matching bound kind)
VerificationReport run_plan(const ExperimentPlan& plan);

ExperimentPlan load_plan_file(const std::string& path);
ExperimentPlan parse_plan_text(const std::string& text, const std::string& origin = "<string>");

void write_report(const VerificationReport& rep, const std::string& path);

// Builds a problem identical to p but with the sup-convolved terminal
// g_n tabulated on [x_lo, x_hi]; the growth exponents are updated to the
// Lipschitz regularization (r_g = 0).
ProblemSpec with_supconv_terminal(const ProblemSpec& p, double n,
                                  double x_lo, double x_hi, double h_tab = 1e-2,
                                  double h_u = 1e-3);

} // namespace superbsde
