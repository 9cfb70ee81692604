#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mimo/solver.hpp"
#include "mimo/verify.hpp"

namespace mimo {

struct BudgetValues {
    double antenna_mw = 2.5;
    double symbol_mw = 2.5;
    double user_mw = 5.0;
    double entry_mw = 1.25;
    double total_mw = 10.0;  // also the SNR reference P_max
};

struct SweepConfig {
    ProblemSpec problem;
    SystemConfig system = default_system();
    BudgetValues budget;
    std::vector<double> noise_ratios;  // empty: default
    std::vector<double> snr_db{0, 5, 10, 15, 20, 25};
    int realizations = 20;
    std::uint64_t seed = 1;
    SolveOptions solve;
    bool duality_only = false;

    void validate() const;
};

// Realization r draws channels from (seed, r), shared across SNR points.
Instance make_instance(const SweepConfig& cfg, double snr_db, int realization);

// sigma_av^2 in dB relative to 1 mW.
double sigma_av2_db(const SweepConfig& cfg, double snr_db);

struct RunRecord {
    double snr_db = 0.0;
    int realization = 0;
    SolveResult result;
    double objective = 0.0;
    double total_power = 0.0;
    double max_weighted_mse = 0.0;
    double spread = 0.0;
    bool epigraph_tight = false;  // every epigraph constraint active at the last GP step
};

// One solve per (snr, realization), ordered by (snr index, realization) whatever the execution.
std::vector<RunRecord> run_sweep(const SweepConfig& cfg, Execution exec = Execution::Parallel);

struct AggregateRow {
    std::string problem;
    double snr_db = 0.0;
    double mean_objective = 0.0;
    double std_objective = 0.0;
    double mean_total_power_mw = 0.0;
    double mean_max_weighted_mse = 0.0;
    double mean_outer_iterations = 0.0;
    double converged_fraction = 0.0;
};

std::vector<AggregateRow> aggregate(const SweepConfig& cfg, const std::vector<RunRecord>& runs);

void write_aggregate_csv(std::ostream& os, const std::vector<AggregateRow>& rows);
void write_trace_csv(std::ostream& os, const std::vector<RunRecord>& runs);
// Per-run balance and status: problem, snr_db, sigma_av2_db, realization, status, outer_iterations,
// objective, spread, epigraph_tight, max_cap_excess_mw, max_J_norm.
void write_summary_csv(std::ostream& os, const SweepConfig& cfg, const std::vector<RunRecord>& runs);

// Paired traces with and without the power GP on matched instances.
void write_compare_csv(std::ostream& os, const std::vector<RunRecord>& alg1, const std::vector<RunRecord>& alg2);

std::string format_number(double v);

}  // namespace mimo
