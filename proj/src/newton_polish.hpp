#pragma once

#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/SVD>

#include "mimo/types.hpp"

namespace mimo::detail {

// Maps x -> ratio(x) with the fixed-point property x = x .* ratio(x).
using RatioFn = std::function<RVec(const RVec&)>;

struct PolishOutcome {
    RVec x;
    bool ok = false;
    int steps = 0;
};

inline RVec safe_ratio(const RatioFn& ratio, const RVec& x)
{
    if (!x.allFinite() || (x.array() <= 0.0).any()) return RVec::Constant(x.size(), std::nan(""));
    try {
        return ratio(x);
    } catch (const std::exception&) {
        return RVec::Constant(x.size(), std::nan(""));
    }
}

// Newton on log ratio_A(x) = 0 over z = log x_A, inactive entries held fixed.
// Central-difference Jacobian; overlapping caps leave flat directions, so the step is minimum-norm.
inline PolishOutcome newton_polish(const RatioFn& ratio, RVec x, const std::vector<int>& active, int max_steps = 25,
                                   double tol = 1e-14)
{
    PolishOutcome out;
    const int n = static_cast<int>(active.size());
    if (n == 0) return out;
    auto residual = [&](const RVec& xx) {
        const RVec r = safe_ratio(ratio, xx);
        RVec g(n);
        for (int i = 0; i < n; ++i) g[i] = std::log(r[active[i]]);
        return g;
    };
    RVec g = residual(x);
    int stalled = 0;
    for (int step = 0; step < max_steps && g.allFinite(); ++step) {
        if (g.cwiseAbs().maxCoeff() <= tol) break;
        const double h = 1e-5;
        RMat Jac(n, n);
        for (int i = 0; i < n; ++i) {
            RVec xp = x, xm = x;
            xp[active[i]] *= std::exp(h);
            xm[active[i]] *= std::exp(-h);
            Jac.col(i) = (residual(xp) - residual(xm)) / (2.0 * h);
        }
        if (!Jac.allFinite()) break;
        // minimum-norm step; the Jacobian is singular along the flat direction
        Eigen::JacobiSVD<RMat> svd(Jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
        svd.setThreshold(1e-9);
        RVec dz = -svd.solve(g);
        if (!dz.allFinite()) break;
        const double biggest = dz.cwiseAbs().maxCoeff();
        if (biggest > 5.0) dz *= 5.0 / biggest;
        const double gn = g.norm();
        double s = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 20; ++ls, s *= 0.5) {
            RVec xn = x;
            for (int i = 0; i < n; ++i) xn[active[i]] *= std::exp(s * dz[i]);
            const RVec gt = residual(xn);
            if (gt.allFinite() && gt.norm() < (1.0 - 1e-4 * s) * gn) {
                x = xn;
                g = gt;
                accepted = true;
                break;
            }
        }
        ++out.steps;
        if (!accepted) break;
        stalled = s < 0.1 ? stalled + 1 : 0;
        if (stalled >= 3) break;
    }
    out.ok = g.allFinite() && g.cwiseAbs().maxCoeff() <= 1e-12;
    out.x = x;
    return out;
}

// Guesses the active set from x, runs Newton, and adjusts the set a few times:
// a failed solve drops the candidate shrinking fastest, an accepted point that overloads
// an excluded entry brings it back. Returns the first point passing `accept`.
inline std::optional<RVec> polish_active_set(const RatioFn& ratio, const RVec& x, double floor_value,
                                             double threshold, const std::function<bool(const RVec&)>& accept,
                                             int& steps, int attempts = 4)
{
    const int m = static_cast<int>(x.size());
    const RVec r0 = safe_ratio(ratio, x);
    if (!r0.allFinite()) return std::nullopt;
    std::vector<bool> in(m);
    const double big = x.maxCoeff();
    for (int j = 0; j < m; ++j) in[j] = x[j] >= threshold * big;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        std::vector<int> active;
        RVec start = x;
        for (int j = 0; j < m; ++j) {
            if (in[j]) {
                active.push_back(j);
                start[j] = std::max(x[j], threshold * big);
            } else {
                start[j] = floor_value;
            }
        }
        if (active.empty()) return std::nullopt;
        const PolishOutcome pol = newton_polish(ratio, start, active);
        steps += pol.steps;
        if (pol.ok) {
            if (accept(pol.x)) return pol.x;
            const RVec r = safe_ratio(ratio, pol.x);
            int worst = -1;
            for (int j = 0; j < m; ++j)
                if (!in[j] && r[j] > 1.0 && (worst < 0 || r[j] > r[worst])) worst = j;
            if (worst < 0) return std::nullopt;
            in[worst] = true;
        } else {
            int drop = -1;
            for (int j : active)
                if (drop < 0 || r0[j] < r0[drop]) drop = j;
            if (active.size() == 1 || r0[drop] >= 1.0) return std::nullopt;
            in[drop] = false;
        }
    }
    return std::nullopt;
}

}  // namespace mimo::detail
