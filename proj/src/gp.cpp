#include "mimo/gp.hpp"

#include <cmath>
#include <limits>

#include "mimo/linalg.hpp"

namespace mimo {

void Posynomial::add(double coef, RVec exps)
{
    if (!(coef >= 0.0) || !std::isfinite(coef)) throw InternalError("posynomial coefficient must be nonnegative");
    if (coef == 0.0) return;
    terms.push_back({coef, std::move(exps)});
}

double Posynomial::eval(const RVec& v) const
{
    double acc = 0.0;
    for (const auto& m : terms) {
        double t = m.coef;
        for (Eigen::Index i = 0; i < m.exps.size(); ++i)
            if (m.exps[i] != 0.0) t *= std::pow(v[i], m.exps[i]);
        acc += t;
    }
    return acc;
}

double GpProblem::max_constraint(const RVec& v) const
{
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& c : constraints) m = std::max(m, c.eval(v));
    return m;
}

PowerDecomposition decompose(const DownlinkTransceiver& dl, double power_floor)
{
    const Eigen::Index N = dl.B.rows(), S = dl.B.cols();
    PowerDecomposition d;
    d.p.resize(S);
    d.G.resize(N, S);
    d.alpha.resize(S);
    d.U = dl.W;
    d.degenerate.assign(S, false);
    const auto off = block_offsets(dl.W);
    for (std::size_t k = 0; k < dl.W.size(); ++k)
        for (int s = 0; s < dl.W[k].cols(); ++s) {
            const int l = off[k] + s;
            const double nb = dl.B.col(l).norm();
            if (nb > 0.0) {
                d.G.col(l) = dl.B.col(l) / nb;
            } else {
                d.G.col(l) = CVec::Unit(N, 0);
            }
            d.p[l] = std::max(nb * nb, power_floor);
            const double nw = dl.W[k].col(s).norm();
            if (nw > 0.0) {
                d.U[k].col(s) /= nw;
            } else {
                d.U[k].col(s) = CVec::Unit(dl.W[k].rows(), 0);
                d.degenerate[l] = true;
            }
            d.alpha[l] = nw * std::sqrt(d.p[l]);
        }
    return d;
}

DownlinkTransceiver recompose(const PowerDecomposition& dec, const RVec& p)
{
    DownlinkTransceiver dl;
    dl.B = dec.G * p.cwiseSqrt().asDiagonal();
    dl.W = dec.U;
    const auto off = block_offsets(dec.U);
    for (std::size_t k = 0; k < dec.U.size(); ++k)
        for (int s = 0; s < dec.U[k].cols(); ++s) {
            const int l = off[k] + s;
            dl.W[k].col(s) *= dec.alpha[l] / std::sqrt(p[l]);
        }
    return dl;
}

RVec MseCoefficients::eval(const RVec& p) const
{
    RVec xi(p.size());
    for (Eigen::Index l = 0; l < p.size(); ++l) {
        const double interf = Phi.col(l).dot(p);
        xi[l] = D[l] + (alpha_sq[l] * interf + noise[l]) / p[l];
    }
    return xi;
}

MseCoefficients build_mse_coefficients(const PowerDecomposition& dec, const ChannelSet& ch, const NoiseModel& noise)
{
    const Eigen::Index S = dec.p.size();
    MseCoefficients c;
    c.Phi = RMat::Zero(S, S);
    c.D.resize(S);
    c.alpha_sq = dec.alpha.cwiseAbs2();
    c.noise.resize(S);
    const auto off = block_offsets(dec.U);
    for (std::size_t k = 0; k < dec.U.size(); ++k)
        for (int s = 0; s < dec.U[k].cols(); ++s) {
            const int l = off[k] + s;
            const CVec u = dec.U[k].col(s);
            const CVec gHu = dec.G.adjoint() * (ch.H[k] * u);  // g_j^H H_k u_l
            for (Eigen::Index j = 0; j < S; ++j)
                if (j != l) c.Phi(j, l) = std::norm(gHu[j]);
            const double a = dec.alpha[l];
            double D = a * a * std::norm(gHu[l]) - 2.0 * a * gHu[l].real() + 1.0;
            if (D < -1e-12) throw InternalError("negative constant MSE term");
            c.D[l] = std::max(D, 0.0);
            c.noise[l] = a * a * real_checked(u.dot(noise.R[k] * u), "noise quadratic form");
        }
    return c;
}

namespace {

// xi_l(p) as a posynomial over n_vars variables.
void add_mse_terms(Posynomial& out, const MseCoefficients& c, int l, double w, int n_vars, int t_index)
{
    const Eigen::Index S = c.D.size();
    auto base = [&]() {
        RVec e = RVec::Zero(n_vars);
        if (t_index >= 0) e[t_index] = -1.0;
        return e;
    };
    out.add(w * c.D[l], base());
    for (Eigen::Index j = 0; j < S; ++j) {
        if (j == l) continue;
        RVec e = base();
        e[j] += 1.0;
        e[l] -= 1.0;
        out.add(w * c.alpha_sq[l] * c.Phi(j, l), e);
    }
    RVec e = base();
    e[l] -= 1.0;
    out.add(w * c.noise[l], e);
}

}  // namespace

GpProblem build_gp(ProblemId id, const MseCoefficients& coeffs, const PowerDecomposition& dec, const RVec& weights,
                   const CapSet& caps, const std::vector<std::vector<int>>& groups, double power_floor)
{
    const int S = static_cast<int>(dec.p.size());
    const bool minmax = id == ProblemId::P3 || id == ProblemId::P4;
    GpProblem gp;
    gp.n_powers = S;
    gp.epigraph = minmax;
    gp.n_vars = S + (minmax ? 1 : 0);
    const int t_index = minmax ? S : -1;

    if (minmax) {
        require(weights.size() == static_cast<Eigen::Index>(groups.size()), "one balancing weight per group");
        RVec e = RVec::Zero(gp.n_vars);
        e[t_index] = 1.0;
        gp.objective.add(1.0, e);
        for (std::size_t g = 0; g < groups.size(); ++g) {
            Posynomial c;
            for (int l : groups[g]) add_mse_terms(c, coeffs, l, weights[g], gp.n_vars, t_index);
            gp.constraints.push_back(std::move(c));
        }
    } else {
        require(weights.size() == S, "one weight per stream");
        for (int l = 0; l < S; ++l) add_mse_terms(gp.objective, coeffs, l, weights[l], gp.n_vars, -1);
    }

    const RMat L = caps.stream_loads(dec.G);
    for (int j = 0; j < caps.size(); ++j) {
        Posynomial c;
        for (int l = 0; l < S; ++l) {
            RVec e = RVec::Zero(gp.n_vars);
            e[l] = 1.0;
            c.add(L(j, l) / caps[j].limit, e);
        }
        gp.constraints.push_back(std::move(c));
    }
    for (int l = 0; l < S; ++l) {
        Posynomial c;
        RVec e = RVec::Zero(gp.n_vars);
        e[l] = -1.0;
        c.add(power_floor, e);
        gp.constraints.push_back(std::move(c));
    }

    gp.warm_start.resize(gp.n_vars);
    gp.warm_start.head(S) = dec.p;
    if (minmax) {
        const RVec xi = coeffs.eval(dec.p);
        double t = 0.0;
        for (std::size_t g = 0; g < groups.size(); ++g) {
            double v = 0.0;
            for (int l : groups[g]) v += xi[l];
            t = std::max(t, weights[g] * v);
        }
        gp.warm_start[t_index] = t;
    }
    return gp;
}

namespace {

// log-sum-exp of a posynomial in y = log v, with gradient and Hessian.
// Lawson-Hanson: min ||A x - b|| subject to x >= 0.
RVec nonnegative_least_squares(const RMat& A, const RVec& b)
{
    const Eigen::Index m = A.cols();
    RVec x = RVec::Zero(m);
    std::vector<bool> passive(static_cast<std::size_t>(m), false);
    auto solve_passive = [&]() {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index i = 0; i < m; ++i)
            if (passive[static_cast<std::size_t>(i)]) idx.push_back(i);
        RMat Ap(A.rows(), static_cast<Eigen::Index>(idx.size()));
        for (std::size_t i = 0; i < idx.size(); ++i) Ap.col(static_cast<Eigen::Index>(i)) = A.col(idx[i]);
        const RVec zp = Ap.colPivHouseholderQr().solve(b);
        RVec z = RVec::Zero(m);
        for (std::size_t i = 0; i < idx.size(); ++i) z[idx[i]] = zp[static_cast<Eigen::Index>(i)];
        return z;
    };
    const double tol = 1e-14 * (1.0 + A.cwiseAbs().maxCoeff() * b.cwiseAbs().maxCoeff());
    for (int outer = 0; outer < 3 * m + 10; ++outer) {
        const RVec w = A.transpose() * (b - A * x);
        Eigen::Index j = -1;
        for (Eigen::Index i = 0; i < m; ++i)
            if (!passive[static_cast<std::size_t>(i)] && w[i] > tol && (j < 0 || w[i] > w[j])) j = i;
        if (j < 0) break;
        passive[static_cast<std::size_t>(j)] = true;
        for (int inner = 0; inner < 3 * m + 10; ++inner) {
            const RVec z = solve_passive();
            double alpha = 1.0;
            bool clipped = false;
            for (Eigen::Index i = 0; i < m; ++i)
                if (passive[static_cast<std::size_t>(i)] && z[i] <= 0.0) {
                    alpha = std::min(alpha, x[i] / (x[i] - z[i]));
                    clipped = true;
                }
            if (!clipped) {
                x = z;
                break;
            }
            x += alpha * (z - x);
            for (Eigen::Index i = 0; i < m; ++i)
                if (passive[static_cast<std::size_t>(i)] && x[i] <= 1e-300) {
                    passive[static_cast<std::size_t>(i)] = false;
                    x[i] = 0.0;
                }
        }
    }
    return x;
}

struct Lse {
    RMat A;   // exponents, one row per monomial
    RVec b;   // log coefficients

    explicit Lse(const Posynomial& p, int n)
    {
        A.resize(static_cast<Eigen::Index>(p.terms.size()), n);
        b.resize(static_cast<Eigen::Index>(p.terms.size()));
        for (std::size_t i = 0; i < p.terms.size(); ++i) {
            A.row(i) = p.terms[i].exps.transpose();
            b[i] = std::log(p.terms[i].coef);
        }
    }

    double value(const RVec& y) const
    {
        const RVec z = A * y + b;
        const double m = z.maxCoeff();
        return m + std::log((z.array() - m).exp().sum());
    }

    void derivs(const RVec& y, double& f, RVec& g, RMat& H) const
    {
        const RVec z = A * y + b;
        const double m = z.maxCoeff();
        const RVec e = (z.array() - m).exp();
        const double s = e.sum();
        f = m + std::log(s);
        const RVec pi = e / s;
        g = A.transpose() * pi;
        H = A.transpose() * pi.asDiagonal() * A - g * g.transpose();
    }
};

// Smallest needed epigraph value; constraints whose monomials all carry t^-1 define it.
bool is_epigraph_row(const Posynomial& p, int t_index)
{
    if (t_index < 0 || p.terms.empty()) return false;
    for (const auto& m : p.terms)
        if (m.exps[t_index] != -1.0) return false;
    return true;
}

double needed_t(const GpProblem& gp, const RVec& v)
{
    const int ti = gp.n_vars - 1;
    RVec w = v;
    w[ti] = 1.0;
    double t = 0.0;
    for (const auto& c : gp.constraints)
        if (is_epigraph_row(c, ti)) t = std::max(t, c.eval(w));
    return t;
}

}  // namespace

double epigraph_activity(const GpProblem& gp, const RVec& powers)
{
    if (!gp.epigraph) return 1.0;
    require(powers.size() == gp.n_powers, "power vector length mismatch");
    const int ti = gp.n_vars - 1;
    RVec v = RVec::Ones(gp.n_vars);
    v.head(gp.n_powers) = powers;
    v[ti] = needed_t(gp, v);
    double least = 1.0;
    for (const auto& c : gp.constraints)
        if (is_epigraph_row(c, ti)) least = std::min(least, c.eval(v));
    return least;
}

std::string to_string(GpStatus s)
{
    switch (s) {
    case GpStatus::Optimal: return "optimal";
    case GpStatus::MaxIter: return "max_iter";
    case GpStatus::LineSearchFailure: return "line_search_failure";
    case GpStatus::WarmStartKept: return "warm_start_kept";
    }
    return "?";
}

GpResult solve_gp(const GpProblem& gp, const GpOptions& opt)
{
    const int n = gp.n_vars;
    require(gp.warm_start.size() == n && (gp.warm_start.array() > 0.0).all(), "warm start must be positive");
    require(gp.max_constraint(gp.warm_start) <= 1.0 + 1e-9, "warm start is infeasible");

    const Lse f0(gp.objective, n);
    std::vector<Lse> fc;
    for (const auto& c : gp.constraints) fc.emplace_back(c, n);
    const double m = static_cast<double>(fc.size());

    GpResult res;
    res.warm_objective = gp.objective.eval(gp.warm_start);

    // Strictly interior start: powers pulled in (floor-bound ones pushed up), epigraph variable raised.
    RVec lower = RVec::Zero(gp.n_powers);
    for (const auto& c : gp.constraints)
        if (c.terms.size() == 1)
            for (int l = 0; l < gp.n_powers; ++l) {
                RVec e = RVec::Zero(n);
                e[l] = -1.0;
                if (c.terms[0].exps == e) lower[l] = std::max(lower[l], c.terms[0].coef);
            }
    auto interior = [&](const RVec& yy) {
        for (const auto& c : fc)
            if (!(c.value(yy) < 0.0)) return false;
        return true;
    };
    RVec y;
    bool found = false;
    for (double shrink = opt.shrink; !found && shrink > 0.5; shrink = 1.0 - 2.0 * (1.0 - shrink)) {
        RVec v = gp.warm_start;
        for (int l = 0; l < gp.n_powers; ++l) v[l] = std::max(v[l] * shrink, lower[l] / shrink);
        if (gp.epigraph) v[n - 1] = needed_t(gp, v) / shrink;
        y = v.array().log();
        found = interior(y);
    }
    if (!found) {
        res.v = gp.warm_start;
        res.objective = res.warm_objective;
        res.status = GpStatus::WarmStartKept;
        return res;
    }

    auto barrier = [&](const RVec& yy, double t, double& val, RVec* grad, RMat* hess) -> bool {
        double f;
        RVec g;
        RMat H;
        if (grad) {
            f0.derivs(yy, f, g, H);
            val = t * f;
            *grad = t * g;
            *hess = t * H;
        } else {
            val = t * f0.value(yy);
        }
        for (const auto& c : fc) {
            double fi;
            RVec gi;
            RMat Hi;
            if (grad) {
                c.derivs(yy, fi, gi, Hi);
            } else {
                fi = c.value(yy);
            }
            if (!(fi < 0.0)) return false;
            val -= std::log(-fi);
            if (grad) {
                *grad += gi / (-fi);
                *hess += Hi / (-fi) + gi * gi.transpose() / (fi * fi);
            }
        }
        return std::isfinite(val);
    };

    double t = 1.0;
    bool ok = true;
    while (true) {
        // centering
        bool centered = false;
        for (int it = 0; it < opt.max_newton; ++it) {
            double val;
            RVec g;
            RMat H;
            barrier(y, t, val, &g, &H);
            Eigen::LDLT<RMat> ldlt(H);
            RVec dy = -ldlt.solve(g);
            if (!dy.allFinite() || g.dot(dy) >= 0.0) {
                RMat Hr = H;
                Hr.diagonal().array() += 1e-10 * (1.0 + H.diagonal().cwiseAbs().maxCoeff());
                dy = -Hr.ldlt().solve(g);
                if (!dy.allFinite() || g.dot(dy) >= 0.0) dy = -g;
            }
            const double dec2 = -g.dot(dy);
            ++res.newton_steps;
            if (dec2 / 2.0 <= opt.centering_tol) {
                centered = true;
                break;
            }
            double s = 1.0;
            bool accepted = false;
            // Near the center Newton converges quadratically, but t*f is too large for Armijo
            // to resolve the decrease; accept the full step unless it visibly increases the barrier.
            const double noise = 1e3 * std::numeric_limits<double>::epsilon() * std::abs(val);
            if (dec2 < 1e-2) {
                double nv;
                accepted = barrier(y + dy, t, nv, nullptr, nullptr) && nv <= val + noise;
            }
            for (int ls = 0; !accepted && ls < 80; ++ls) {
                double nv;
                if (barrier(y + s * dy, t, nv, nullptr, nullptr) && nv <= val + opt.armijo_alpha * s * g.dot(dy)) {
                    accepted = true;
                } else {
                    s *= opt.armijo_beta;
                }
            }
            if (!accepted) {
                // no progress possible at this precision; treat as centered
                centered = dec2 / 2.0 <= std::max(1e3 * opt.centering_tol, noise);
                if (!centered) res.status = GpStatus::LineSearchFailure;
                break;
            }
            y += s * dy;
        }
        if (!centered && res.status == GpStatus::Optimal) res.status = GpStatus::MaxIter;
        if (res.status != GpStatus::Optimal) {
            ok = false;
            break;
        }
        if (m / t < opt.tol) break;
        t *= opt.mu;
    }

    // KKT residual: stationarity plus complementarity, with the best nonnegative multipliers on the
    // near-active constraints. The barrier estimate 1 / (t (-f_i)) is too noisy once t is large.
    {
        double f;
        RVec g;
        RMat H;
        f0.derivs(y, f, g, H);
        std::vector<RVec> grads;
        std::vector<double> slack;
        for (const auto& c : fc) {
            double fi;
            RVec gi;
            RMat Hi;
            c.derivs(y, fi, gi, Hi);
            if (-fi <= 1e-7) {
                grads.push_back(gi);
                slack.push_back(-fi);
            }
        }
        RMat A(n, static_cast<Eigen::Index>(grads.size()));
        for (std::size_t i = 0; i < grads.size(); ++i) A.col(static_cast<Eigen::Index>(i)) = grads[i];
        const RVec lambda = grads.empty() ? RVec() : nonnegative_least_squares(A, -g);
        double kkt = grads.empty() ? g.cwiseAbs().maxCoeff() : (g + A * lambda).cwiseAbs().maxCoeff();
        for (std::size_t i = 0; i < grads.size(); ++i) kkt = std::max(kkt, lambda[static_cast<Eigen::Index>(i)] * slack[i]);
        res.kkt_residual = kkt;
    }

    res.v = y.array().exp();
    if (gp.epigraph) {
        const double tn = needed_t(gp, res.v);
        if (tn > 0.0) res.v[n - 1] = tn;
    }
    res.objective = gp.objective.eval(res.v);
    const bool feasible = gp.max_constraint(res.v) <= 1.0 + 1e-9;
    if (!feasible || !(res.objective <= res.warm_objective + 1e-12)) {
        res.v = gp.warm_start;
        res.objective = res.warm_objective;
        res.status = GpStatus::WarmStartKept;
    } else if (!ok && res.status == GpStatus::Optimal) {
        res.status = GpStatus::MaxIter;
    }
    return res;
}

GridResult grid_oracle(const GpProblem& gp, int points_per_dim, int zoom_rounds, double power_floor)
{
    const int S = gp.n_powers;
    require(S >= 1 && S <= 3, "grid oracle supports at most 3 power variables");
    require(points_per_dim >= 2, "need at least two grid points");
    const int ti = gp.epigraph ? gp.n_vars - 1 : -1;

    // upper bound of each power from its own linear terms in the non-epigraph constraints
    RVec hi = RVec::Constant(S, std::numeric_limits<double>::infinity());
    for (const auto& c : gp.constraints) {
        if (is_epigraph_row(c, ti)) continue;
        for (const auto& mnm : c.terms)
            for (int l = 0; l < S; ++l) {
                RVec unit = RVec::Zero(gp.n_vars);
                unit[l] = 1.0;
                if (mnm.exps == unit) hi[l] = std::min(hi[l], 1.0 / mnm.coef);
            }
    }
    require(hi.allFinite(), "every power needs an upper bound");
    RVec lo = RVec::Constant(S, power_floor);

    auto objective_at = [&](const RVec& p, double& obj) {
        RVec v = RVec::Ones(gp.n_vars);
        v.head(S) = p;
        for (const auto& c : gp.constraints) {
            if (is_epigraph_row(c, ti)) continue;
            if (c.eval(v) > 1.0 + 1e-12) return false;
        }
        if (gp.epigraph) {
            obj = needed_t(gp, v);
        } else {
            obj = gp.objective.eval(v);
        }
        return true;
    };

    GridResult best;
    best.objective_best = std::numeric_limits<double>::infinity();
    RVec cur_lo = lo, cur_hi = hi;
    for (int round = 0; round <= zoom_rounds; ++round) {
        RVec step = ((cur_hi.array().log() - cur_lo.array().log()) / (points_per_dim - 1)).matrix();
        std::vector<int> idx(S, 0);
        RVec p(S);
        while (true) {
            for (int l = 0; l < S; ++l) p[l] = std::exp(std::log(cur_lo[l]) + step[l] * idx[l]);
            double obj;
            if (objective_at(p, obj) && obj < best.objective_best) {
                best.objective_best = obj;
                best.p_best = p;
            }
            int d = 0;
            while (d < S && ++idx[d] == points_per_dim) idx[d++] = 0;
            if (d == S) break;
        }
        if (best.p_best.size() == 0) break;
        for (int l = 0; l < S; ++l) {
            const double c = std::log(best.p_best[l]);
            cur_lo[l] = std::max(lo[l], std::exp(c - 2.0 * step[l]));
            cur_hi[l] = std::min(hi[l], std::exp(c + 2.0 * step[l]));
        }
    }
    return best;
}

}  // namespace mimo
