#pragma once

#include <string>
#include <vector>

#include "mimo/constraints.hpp"
#include "mimo/mse.hpp"
#include "mimo/problem.hpp"

namespace mimo {

struct Monomial {
    double coef = 0.0;
    RVec exps;  // one exponent per variable
};

struct Posynomial {
    std::vector<Monomial> terms;

    // Drops zero-coefficient terms; rejects negative ones.
    void add(double coef, RVec exps);
    double eval(const RVec& v) const;
};

// min objective(v) s.t. constraints(v) <= 1, v > 0.
// Variables: the S stream powers, then the epigraph variable t when present.
struct GpProblem {
    int n_vars = 0;
    int n_powers = 0;
    bool epigraph = false;
    Posynomial objective;
    std::vector<Posynomial> constraints;
    RVec warm_start;

    double max_constraint(const RVec& v) const;
};

struct PowerDecomposition {
    RVec p;                    // stream powers, floored
    CMat G;                    // unit-norm transmit directions, N x S
    std::vector<CMat> U;       // unit-norm receive directions per user
    RVec alpha;                // ||w_l|| sqrt(p_l)
    std::vector<bool> degenerate;  // w_l == 0
};

PowerDecomposition decompose(const DownlinkTransceiver& dl, double power_floor = 1e-6);
// B = G sqrt(p), w_l = alpha_l u_l / sqrt(p_l)
DownlinkTransceiver recompose(const PowerDecomposition& dec, const RVec& p);

// xi_l(p) = D_l + alpha_l^2 sum_{j != l} Phi(j,l) p_j / p_l + noise_l / p_l
struct MseCoefficients {
    RMat Phi;      // Phi(j, l) = |g_j^H H_{k(l)} u_l|^2, zero diagonal
    RVec D;
    RVec alpha_sq;
    RVec noise;    // alpha_l^2 u_l^H R u_l
    RVec eval(const RVec& p) const;
};

MseCoefficients build_mse_coefficients(const PowerDecomposition& dec, const ChannelSet& ch, const NoiseModel& noise);

// stream_weights: eta (P1, P5), replicated eta tilde (P2), rho (P3), rho tilde per group (P4, indexed by group).
GpProblem build_gp(ProblemId id, const MseCoefficients& coeffs, const PowerDecomposition& dec, const RVec& weights,
                   const CapSet& caps, const std::vector<std::vector<int>>& groups, double power_floor = 1e-6);

struct GpOptions {
    double tol = 1e-9;          // duality-gap bound m / t
    int max_newton = 200;       // per centering step
    double centering_tol = 1e-10;  // half squared Newton decrement
    double mu = 10.0;           // barrier growth
    double armijo_beta = 0.5;
    double armijo_alpha = 1e-4;
    double shrink = 0.999;      // warm start pulled into the interior
};

enum class GpStatus { Optimal, MaxIter, LineSearchFailure, WarmStartKept };

struct GpResult {
    RVec v;
    double objective = 0.0;
    double warm_objective = 0.0;
    double kkt_residual = 0.0;
    int newton_steps = 0;
    GpStatus status = GpStatus::Optimal;
};

GpResult solve_gp(const GpProblem& gp, const GpOptions& opt = {});

// Smallest epigraph constraint value at these powers with t as small as allowed; 1 means every
// group's weighted MSE sits on the common level. Returns 1 without an epigraph.
double epigraph_activity(const GpProblem& gp, const RVec& powers);

// Log-spaced exhaustive search with zoom refinement; the epigraph variable is eliminated as a max.
struct GridResult {
    RVec p_best;
    double objective_best = 0.0;
};
GridResult grid_oracle(const GpProblem& gp, int points_per_dim, int zoom_rounds = 4, double power_floor = 1e-6);

std::string to_string(GpStatus s);

}  // namespace mimo
