#pragma once

#include <vector>

#include "mimo/constraints.hpp"
#include "mimo/mse.hpp"

namespace mimo {

// Partition of streams into balancing groups: one per stream (P3) or one per user (P4).
struct Grouping {
    std::vector<std::vector<int>> groups;
    std::vector<int> group_of;  // per stream

    int size() const { return static_cast<int>(groups.size()); }
    static Grouping per_stream(int S);
    static Grouping per_user(const std::vector<int>& S);
};

// (Y + diag) beta = rhs
struct CouplingSystem {
    RMat Y;
    RVec diag;
    RVec rhs;

    RMat matrix() const;
    // I + Y diag^{-1}
    RMat structured() const;
    RVec solve() const;
};

// Ybar, Theta and a = sum_{l in g} b_l^H Delta_l b_l.
CouplingSystem downlink_coupling(const DownlinkTransceiver& dl, const ChannelSet& ch, const NoiseModel& noise,
                                 const Grouping& grp, const RMat& noise_diag);
// Ycheck, Omega check and rhs_g = tr(V_g^H R V_g); ifc must hold T and noise_diag.
CouplingSystem interference_coupling(const InterferenceTransceiver& ifc, const ChannelSet& ch, const NoiseModel& noise,
                                     const Grouping& grp);

// V_g = beta_bar_g W_g, T_g = B_g / beta_bar_g, zeta = 1; rhs optionally scaled.
InterferenceTransceiver dl_to_if_minmax(const DownlinkTransceiver& dl, const ChannelSet& ch, const NoiseModel& noise,
                                        const Grouping& grp, const RMat& noise_diag, double rhs_scale = 1.0);
// B_g = beta_g T_g, W_g = V_g / beta_g.
DownlinkTransceiver if_to_dl_minmax(const InterferenceTransceiver& ifc, const ChannelSet& ch, const NoiseModel& noise,
                                    const Grouping& grp, RVec* beta_sq = nullptr);

RVec solve_beta_bar_symbolwise(const DownlinkTransceiver& dl, const ChannelSet& ch, const NoiseModel& noise,
                               const RVec& psi, const RVec& mu);
RVec solve_beta_symbolwise(const InterferenceTransceiver& ifc, const ChannelSet& ch, const NoiseModel& noise);
RVec solve_beta_bar_userwise(const DownlinkTransceiver& dl, const ChannelSet& ch, const NoiseModel& noise,
                             const RVec& psi, const RVec& mu);
RVec solve_beta_userwise(const InterferenceTransceiver& ifc, const ChannelSet& ch, const NoiseModel& noise);

// beta^2 through (I + Ycheck Omega^-1)^-1 (I + Ybar Theta^-1)^-1 P x, as a cross-check of the direct solve.
RVec solve_beta_factored(const CouplingSystem& dl_sys, const CouplingSystem& if_sys);

struct SwitchedOptions {
    double tol = 1e-10;
    int max_iter = 5000;
    bool record = false;  // keep every iterate
    int polish_every = 25;  // active-set Newton attempt period; 0 disables
    double active_threshold = 1e-6;
};

struct SwitchedIterate {
    double J_norm = 0.0;
    double residual = 0.0;
};

struct SwitchedResult {
    RVec x;            // multipliers (psi, mu) in CapSet order
    RVec x_prime;      // cap-scaled multipliers
    int iterations = 0;
    bool converged = false;
    double residual = 0.0;
    double max_J_norm = 0.0;
    double min_x_prime = 0.0;
    bool polished = false;
    int polish_steps = 0;
    std::vector<SwitchedIterate> trace;
};

struct SwitchingMap {
    RMat J;
    InterferenceTransceiver ifc;  // with MMSE T at x
    DownlinkTransceiver dl;       // transferred back
    RVec beta_bar_sq;
    RVec beta_sq;
};

// Builds J(x') in the fixed order (psi, mu) -> beta_bar -> T -> beta -> loads -> J.
SwitchingMap switching_map(const DownlinkTransceiver& dl, const ChannelSet& ch, const NoiseModel& noise,
                           const Grouping& grp, const CapSet& caps, const RVec& x_prime);

SwitchedResult switched_iteration(const DownlinkTransceiver& dl, const ChannelSet& ch, const NoiseModel& noise,
                                  const Grouping& grp, const CapSet& caps, const SwitchedOptions& opt,
                                  const RVec* x0 = nullptr);
SwitchedResult switched_iteration_symbolwise(const DownlinkTransceiver& dl, const ChannelSet& ch,
                                             const NoiseModel& noise, const CapSet& caps, const SwitchedOptions& opt);
SwitchedResult switched_iteration_userwise(const DownlinkTransceiver& dl, const ChannelSet& ch, const NoiseModel& noise,
                                           const CapSet& caps, const SwitchedOptions& opt);

struct MinmaxTransfer {
    InterferenceTransceiver ifc;  // after the interference MMSE update
    DownlinkTransceiver dl;
    RVec beta_bar_sq;
    RVec beta_sq;
    SwitchedResult sw;
    bool used_switched = false;
};

MinmaxTransfer minmax_round_trip(const DownlinkTransceiver& dl, const ChannelSet& ch, const NoiseModel& noise,
                                 const Grouping& grp, const CapSet& caps, const SwitchedOptions& opt);

// Delta = I; the dl -> if right-hand side is scaled so that the round trip lands on P_max.
MinmaxTransfer total_power_transfer_minmax(const DownlinkTransceiver& dl, const ChannelSet& ch, const NoiseModel& noise,
                                           const Grouping& grp, double p_max);

struct StructuredInverseReport {
    double min_inverse_entry = 0.0;
    double inverse_one_norm = 0.0;
    double column_sum_residual = 0.0;
};

// A must have nonpositive off-diagonals and unit column sums.
StructuredInverseReport structured_inverse_check(const RMat& A);

}  // namespace mimo
