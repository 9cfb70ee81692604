#include "mimo/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace mimo {

void SweepConfig::validate() const
{
    system.validate();
    require(realizations >= 1, "realizations must be >= 1");
    require(!snr_db.empty(), "snr list must not be empty");
    for (double s : snr_db) require(std::isfinite(s), "snr values must be finite");
    require(budget.total_mw > 0.0, "total power must be positive");
    switch (problem.cap_mode()) {
    case CapMode::AntennaSymbol:
        require(budget.antenna_mw > 0.0 && budget.symbol_mw > 0.0, "antenna and symbol caps must be positive");
        break;
    case CapMode::AntennaUser:
        require(budget.antenna_mw > 0.0 && budget.user_mw > 0.0, "antenna and user caps must be positive");
        break;
    case CapMode::Entrywise: require(budget.entry_mw > 0.0, "entry cap must be positive"); break;
    case CapMode::Total: break;
    }
    if (!noise_ratios.empty()) {
        require(static_cast<int>(noise_ratios.size()) == system.K, "need one noise ratio per user");
        for (double r : noise_ratios) require(r > 0.0, "noise ratios must be positive");
    }
}

namespace {

std::vector<double> ratios_of(const SweepConfig& cfg)
{
    return cfg.noise_ratios.empty() ? default_noise_ratios(cfg.system.K) : cfg.noise_ratios;
}

RunRecord solve_one(const SweepConfig& cfg, std::size_t snr_index, int realization)
{
    RunRecord rec;
    rec.snr_db = cfg.snr_db[snr_index];
    rec.realization = realization;
    const Instance inst = make_instance(cfg, rec.snr_db, realization);
    rec.result = cfg.duality_only ? solve_duality_only(cfg.problem, inst, cfg.solve)
                                : solve_with_gp(cfg.problem, inst, cfg.solve);
    const Evaluation ev = evaluate(cfg.problem, inst, rec.result.dl);
    rec.objective = ev.objective;
    rec.total_power = ev.power.total;
    rec.max_weighted_mse = ev.report.max_weighted;
    rec.spread = ev.spread;
    const auto& it = rec.result.trace.iters;
    rec.epigraph_tight = cfg.problem.objective == ObjectiveKind::MinMax && !it.empty() && it.back().gp_run &&
                         it.back().epigraph_activity >= 1.0 - 1e-6;
    return rec;
}

double max_j_norm(const IterationTrace& t)
{
    double m = 0.0;
    for (const auto& r : t.iters) m = std::max(m, r.max_J_norm);
    return m;
}

double max_excess(const IterationTrace& t)
{
    double m = -1e300;
    for (const auto& r : t.iters) m = std::max(m, r.max_cap_excess);
    return t.iters.empty() ? 0.0 : m;
}

}  // namespace

Instance make_instance(const SweepConfig& cfg, double snr_db, int realization)
{
    Instance inst;
    inst.cfg = cfg.system;
    inst.cfg.fill_default_weights();
    inst.ch = generate_channels(inst.cfg, cfg.seed, static_cast<std::uint64_t>(realization));
    const auto ratios = ratios_of(cfg);
    const double sigma_av = snr_to_sigma(cfg.budget.total_mw, inst.cfg.K, snr_db);
    inst.noise = default_noise(inst.cfg, sigma1_from_average(sigma_av, ratios), ratios);
    inst.budget = uniform_budget(inst.cfg, cfg.problem.cap_mode(), cfg.budget.antenna_mw, cfg.budget.symbol_mw,
                                 cfg.budget.user_mw, cfg.budget.entry_mw, cfg.budget.total_mw);
    return inst;
}

double sigma_av2_db(const SweepConfig& cfg, double snr_db)
{
    return 10.0 * std::log10(snr_to_sigma(cfg.budget.total_mw, cfg.system.K, snr_db) / 1.0);
}

std::vector<RunRecord> run_sweep(const SweepConfig& cfg, Execution exec)
{
    cfg.validate();
    const std::size_t n_snr = cfg.snr_db.size();
    const std::size_t R = static_cast<std::size_t>(cfg.realizations);
    const long jobs = static_cast<long>(n_snr * R);
    std::vector<RunRecord> out(static_cast<std::size_t>(jobs));
    if (exec == Execution::Parallel) {
        // jobs write disjoint slots; a failure in one is rethrown after the loop
        std::string error;
#pragma omp parallel for schedule(dynamic)
        for (long j = 0; j < jobs; ++j) {
            try {
                out[static_cast<std::size_t>(j)] =
                    solve_one(cfg, static_cast<std::size_t>(j) / R, static_cast<int>(static_cast<std::size_t>(j) % R));
            } catch (const std::exception& e) {
#pragma omp critical
                if (error.empty()) error = e.what();
            }
        }
        if (!error.empty()) throw std::runtime_error(error);
    } else {
        for (long j = 0; j < jobs; ++j)
            out[static_cast<std::size_t>(j)] =
                solve_one(cfg, static_cast<std::size_t>(j) / R, static_cast<int>(static_cast<std::size_t>(j) % R));
    }
    return out;
}

std::vector<AggregateRow> aggregate(const SweepConfig& cfg, const std::vector<RunRecord>& runs)
{
    std::vector<AggregateRow> rows;
    const std::string name = problem_name(cfg.problem.id);
    for (double snr : cfg.snr_db) {
        AggregateRow row;
        row.problem = name;
        row.snr_db = snr;
        int n = 0;
        for (const auto& r : runs) {
            if (r.snr_db != snr) continue;
            ++n;
            row.mean_objective += r.objective;
            row.mean_total_power_mw += r.total_power;
            row.mean_max_weighted_mse += r.max_weighted_mse;
            row.mean_outer_iterations += r.result.trace.iterations;
            row.converged_fraction += r.result.trace.converged ? 1.0 : 0.0;
        }
        if (n == 0) continue;
        row.mean_objective /= n;
        row.mean_total_power_mw /= n;
        row.mean_max_weighted_mse /= n;
        row.mean_outer_iterations /= n;
        row.converged_fraction /= n;
        double ss = 0.0;
        for (const auto& r : runs)
            if (r.snr_db == snr) ss += (r.objective - row.mean_objective) * (r.objective - row.mean_objective);
        row.std_objective = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
        rows.push_back(row);
    }
    return rows;
}

std::string format_number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_aggregate_csv(std::ostream& os, const std::vector<AggregateRow>& rows)
{
    os << "problem,snr_db,mean_objective,std_objective,mean_total_power_mw,mean_max_weighted_mse,"
          "mean_outer_iterations,converged_fraction\n";
    for (const auto& r : rows)
        os << r.problem << ',' << format_number(r.snr_db) << ',' << format_number(r.mean_objective) << ','
           << format_number(r.std_objective) << ',' << format_number(r.mean_total_power_mw) << ','
           << format_number(r.mean_max_weighted_mse) << ',' << format_number(r.mean_outer_iterations) << ','
           << format_number(r.converged_fraction) << '\n';
}

void write_trace_csv(std::ostream& os, const std::vector<RunRecord>& runs)
{
    os << "snr_db,realization,outer_iter,objective,total_power_mw,max_weighted_mse,status\n";
    for (const auto& r : runs) {
        const std::string status = to_string(r.result.trace.status);
        const auto& its = r.result.trace.iters;
        for (std::size_t i = 0; i < its.size(); ++i)
            os << format_number(r.snr_db) << ',' << r.realization << ',' << i + 1 << ','
               << format_number(its[i].objective) << ',' << format_number(its[i].total_power) << ','
               << format_number(its[i].max_weighted_mse) << ',' << status << '\n';
    }
}

void write_summary_csv(std::ostream& os, const SweepConfig& cfg, const std::vector<RunRecord>& runs)
{
    os << "problem,snr_db,sigma_av2_db,realization,status,outer_iterations,objective,spread,epigraph_tight,"
          "max_cap_excess_mw,max_J_norm\n";
    const std::string name = problem_name(cfg.problem.id);
    for (const auto& r : runs) {
        const auto& t = r.result.trace;
        os << name << ',' << format_number(r.snr_db) << ',' << format_number(sigma_av2_db(cfg, r.snr_db)) << ','
           << r.realization << ',' << to_string(t.status) << ',' << t.iterations << ',' << format_number(r.objective)
           << ',' << format_number(r.spread) << ',' << (r.epigraph_tight ? 1 : 0) << ','
           << format_number(max_excess(t)) << ',' << format_number(max_j_norm(t)) << '\n';
    }
}

void write_compare_csv(std::ostream& os, const std::vector<RunRecord>& alg1, const std::vector<RunRecord>& alg2)
{
    require(alg1.size() == alg2.size(), "compare needs matched runs");
    os << "snr_db,realization,outer_iter,objective_duality_only,objective_with_gp\n";
    for (std::size_t i = 0; i < alg1.size(); ++i) {
        const auto& a = alg1[i].result.trace;
        const auto& b = alg2[i].result.trace;
        require(alg1[i].snr_db == alg2[i].snr_db && alg1[i].realization == alg2[i].realization,
                "compare runs must be aligned");
        // iteration 0 is the shared initial point; finished runs leave their column empty
        os << format_number(alg1[i].snr_db) << ',' << alg1[i].realization << ",0,"
           << format_number(a.initial_objective) << ',' << format_number(b.initial_objective) << '\n';
        const std::size_t n = std::max(a.iters.size(), b.iters.size());
        for (std::size_t it = 0; it < n; ++it) {
            os << format_number(alg1[i].snr_db) << ',' << alg1[i].realization << ',' << it + 1 << ',';
            if (it < a.iters.size()) os << format_number(a.iters[it].objective);
            os << ',';
            if (it < b.iters.size()) os << format_number(b.iters[it].objective);
            os << '\n';
        }
    }
}

}  // namespace mimo
