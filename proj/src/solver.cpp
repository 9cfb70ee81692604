#include "mimo/solver.hpp"

#include <cmath>
#include <sstream>

namespace mimo {

std::string to_string(RunStatus s)
{
    switch (s) {
    case RunStatus::Converged: return "converged";
    case RunStatus::MaxOuter: return "max_outer";
    case RunStatus::MonotonicityViolation: return "monotonicity_violation";
    case RunStatus::InnerNotConverged: return "inner_not_converged";
    }
    return "?";
}

namespace {

PowerBudget budget_for(const ProblemSpec& spec, const Instance& inst)
{
    PowerBudget b = inst.budget;
    b.mode = spec.cap_mode();
    return b;
}

Grouping grouping_for(const ProblemSpec& spec, const SystemConfig& cfg)
{
    return spec.granularity == Granularity::Symbol ? Grouping::per_stream(cfg.total_streams())
                                                   : Grouping::per_user(cfg.S);
}

double weighted_spread(const RVec& weighted)
{
    const double mx = weighted.maxCoeff();
    return mx > 0.0 ? (mx - weighted.minCoeff()) / mx : 0.0;
}

}  // namespace

DownlinkTransceiver init_transceiver(const ProblemSpec& spec, const Instance& inst)
{
    const SystemConfig& cfg = inst.cfg;
    DownlinkTransceiver dl;
    dl.B.resize(cfg.N, cfg.total_streams());
    for (int k = 0; k < cfg.K; ++k) dl.B.middleCols(cfg.stream_offset(k), cfg.S[k]) = inst.ch.H[k].leftCols(cfg.S[k]);
    const CapSet caps(cfg, budget_for(spec, inst));
    dl.B /= std::sqrt(caps.max_ratio(dl.B));
    // guard against the last ulp
    while (caps.max_excess(dl.B) > 0.0) dl.B *= 1.0 - 1e-15;
    dl.W = mmse_receiver_dl(dl.B, inst.ch, inst.noise, cfg.S);
    return dl;
}

Evaluation evaluate(const ProblemSpec& spec, const Instance& inst, const DownlinkTransceiver& dl)
{
    Evaluation ev;
    const RVec w = spec.weights(inst.cfg);
    ev.report = mse_report(dl, inst.ch, inst.noise, w, spec.granularity);
    ev.objective = spec.objective == ObjectiveKind::WeightedSum ? ev.report.wsmse : ev.report.max_weighted;
    const RVec& base = spec.granularity == Granularity::Symbol ? ev.report.symbol_mse : ev.report.user_mse;
    ev.spread = weighted_spread(w.cwiseProduct(base));
    ev.power = powers(dl.B, inst.cfg.S);
    ev.max_cap_excess = CapSet(inst.cfg, budget_for(spec, inst)).max_excess(dl.B);
    return ev;
}

namespace {

SolveResult run_loop(const ProblemSpec& spec, const Instance& inst, const SolveOptions& opt, bool use_gp)
{
    const SystemConfig& cfg = inst.cfg;
    const CapSet caps(cfg, budget_for(spec, inst));
    const Grouping grp = grouping_for(spec, cfg);
    const RVec sw = spec.stream_weights(cfg);
    const RVec gw = spec.objective == ObjectiveKind::WeightedSum ? sw : spec.weights(cfg);
    const bool wsmse = spec.objective == ObjectiveKind::WeightedSum;

    SolveResult out;
    out.dl = init_transceiver(spec, inst);
    double prev = evaluate(spec, inst, out.dl).objective;
    out.trace.initial_objective = prev;

    for (int it = 1; it <= opt.max_outer; ++it) {
        IterationRecord rec;
        DownlinkTransceiver cand;
        if (wsmse) {
            WsmseTransfer tr = spec.total_power
                                   ? total_power_transfer_wsmse(out.dl, inst.ch, inst.noise, sw, inst.budget.total)
                                   : wsmse_round_trip(out.dl, inst.ch, inst.noise, sw, caps, opt.fixed_point);
            rec.beta_bar_sq = RVec::Constant(1, tr.beta_bar_sq);
            rec.beta_sq = RVec::Constant(1, tr.beta_sq);
            rec.inner_iterations = tr.fp.iterations;
            rec.inner_converged = !tr.used_fixed_point || tr.fp.converged;
            cand = std::move(tr.dl);
        } else {
            MinmaxTransfer tr = spec.total_power
                                    ? total_power_transfer_minmax(out.dl, inst.ch, inst.noise, grp, inst.budget.total)
                                    : minmax_round_trip(out.dl, inst.ch, inst.noise, grp, caps, opt.switched);
            rec.beta_bar_sq = tr.beta_bar_sq;
            rec.beta_sq = tr.beta_sq;
            rec.inner_iterations = tr.sw.iterations;
            rec.inner_converged = !tr.used_switched || tr.sw.converged;
            rec.max_J_norm = tr.sw.max_J_norm;
            cand = std::move(tr.dl);
        }
        if (!rec.inner_converged) out.trace.inner_failures = true;

        // An unconverged inner loop may leave caps slightly exceeded; scale back uniformly.
        const double ratio = caps.max_ratio(cand.B);
        if (ratio > 1.0 && caps.max_excess(cand.B) > 0.0) {
            const double f = std::sqrt(ratio);
            cand.B /= f;
            for (auto& w : cand.W) w *= f;
            while (caps.max_excess(cand.B) > 0.0) cand.B *= 1.0 - 1e-15;
        }

        if (use_gp) {
            const PowerDecomposition dec = decompose(cand, opt.power_floor);
            const MseCoefficients coeffs = build_mse_coefficients(dec, inst.ch, inst.noise);
            const GpProblem gp = build_gp(spec.id, coeffs, dec, gw, caps, grp.groups, opt.power_floor);
            GpResult gr;
            if (gp.max_constraint(gp.warm_start) <= 1.0 + 1e-9) {
                gr = solve_gp(gp, opt.gp);
            } else {
                gr.status = GpStatus::WarmStartKept;
            }
            rec.gp_run = true;
            rec.gp_status = gr.status;
            if (gr.status != GpStatus::WarmStartKept) {
                const DownlinkTransceiver next = recompose(dec, gr.v.head(gp.n_powers));
                // keep the GP step only if it really helps the downlink objective and respects the caps
                if (caps.max_excess(next.B) <= 1e-12 &&
                    evaluate(spec, inst, next).objective <= evaluate(spec, inst, cand).objective) {
                    cand = next;
                    rec.epigraph_activity = epigraph_activity(gp, gr.v.head(gp.n_powers));
                } else {
                    rec.gp_status = GpStatus::WarmStartKept;
                }
            }
            if (rec.gp_status == GpStatus::WarmStartKept) rec.epigraph_activity = epigraph_activity(gp, dec.p);
        }

        out.dl.B = std::move(cand.B);
        out.dl.W = mmse_receiver_dl(out.dl.B, inst.ch, inst.noise, cfg.S);

        const Evaluation ev = evaluate(spec, inst, out.dl);
        rec.objective = ev.objective;
        rec.symbol_mse = ev.report.symbol_mse;
        rec.per_antenna = ev.power.per_antenna;
        rec.per_symbol = ev.power.per_symbol;
        rec.per_user = ev.power.per_user;
        rec.total_power = ev.power.total;
        rec.max_weighted_mse = ev.report.max_weighted;
        rec.spread = ev.spread;
        rec.max_cap_excess = ev.max_cap_excess;
        out.trace.iters.push_back(rec);
        out.trace.iterations = it;

        if (ev.objective > prev + opt.monotonicity_tol) {
            std::ostringstream os;
            os.precision(17);
            os << "objective increased at outer iteration " << it << ": " << prev << " -> " << ev.objective
               << " (inner iterations " << rec.inner_iterations << ", inner converged " << rec.inner_converged
               << ", gp " << to_string(rec.gp_status) << ")";
            out.trace.status = RunStatus::MonotonicityViolation;
            out.trace.diagnostic = os.str();
            return out;
        }
        if (std::abs(prev - ev.objective) < opt.outer_tol) {
            out.trace.converged = true;
            break;
        }
        prev = ev.objective;
    }
    if (out.trace.converged) {
        out.trace.status = out.trace.inner_failures ? RunStatus::InnerNotConverged : RunStatus::Converged;
    } else {
        out.trace.status = RunStatus::MaxOuter;
    }
    return out;
}

}  // namespace

SolveResult solve_with_gp(const ProblemSpec& spec, const Instance& inst, const SolveOptions& opt)
{
    return run_loop(spec, inst, opt, true);
}

SolveResult solve_duality_only(const ProblemSpec& spec, const Instance& inst, const SolveOptions& opt)
{
    return run_loop(spec, inst, opt, false);
}

}  // namespace mimo
