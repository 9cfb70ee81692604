#pragma once

#include <string>
#include <vector>

#include "mimo/duality_minmax.hpp"
#include "mimo/duality_wsmse.hpp"
#include "mimo/gp.hpp"
#include "mimo/problem.hpp"

namespace mimo {

struct SolveOptions {
    double outer_tol = 1e-6;
    int max_outer = 200;
    double power_floor = 1e-6;
    double monotonicity_tol = 1e-9;
    FixedPointOptions fixed_point;
    SwitchedOptions switched;
    GpOptions gp;
};

enum class RunStatus { Converged, MaxOuter, MonotonicityViolation, InnerNotConverged };

struct IterationRecord {
    double objective = 0.0;
    RVec symbol_mse;
    RVec per_antenna;
    RVec per_symbol;
    RVec per_user;
    double total_power = 0.0;
    double max_weighted_mse = 0.0;
    double spread = 0.0;           // (max - min) / max of weighted MSEs at the problem's granularity
    RVec beta_bar_sq;
    RVec beta_sq;
    int inner_iterations = 0;      // fixed-point or switched
    bool inner_converged = true;
    double max_J_norm = 0.0;
    double max_cap_excess = 0.0;   // max_j power_j - cap_j, mW
    GpStatus gp_status = GpStatus::Optimal;
    bool gp_run = false;
    double epigraph_activity = 1.0;  // min-max problems: 1 when all epigraph constraints are tight
};

struct IterationTrace {
    double initial_objective = 0.0;
    std::vector<IterationRecord> iters;
    bool converged = false;
    int iterations = 0;
    RunStatus status = RunStatus::MaxOuter;
    bool inner_failures = false;
    std::string diagnostic;
};

struct SolveResult {
    DownlinkTransceiver dl;
    IterationTrace trace;
};

struct Evaluation {
    double objective = 0.0;
    MseReport report;     // at the problem's granularity and weights
    double max_cap_excess = 0.0;
    double spread = 0.0;
    PowerReport power;
};

DownlinkTransceiver init_transceiver(const ProblemSpec& spec, const Instance& inst);
SolveResult solve_with_gp(const ProblemSpec& spec, const Instance& inst, const SolveOptions& opt = {});
SolveResult solve_duality_only(const ProblemSpec& spec, const Instance& inst, const SolveOptions& opt = {});
Evaluation evaluate(const ProblemSpec& spec, const Instance& inst, const DownlinkTransceiver& dl);

std::string to_string(RunStatus s);

}  // namespace mimo
