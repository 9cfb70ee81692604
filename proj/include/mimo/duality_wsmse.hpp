#pragma once

#include "mimo/constraints.hpp"
#include "mimo/mse.hpp"

namespace mimo {

struct FixedPointOptions {
    double tol = 1e-10;       // relative, on ||x - F(x)||_inf / ||x||_inf
    int max_iter = 5000;
    double eps_rel = 1e-12;   // floor = eps_rel * min_j(E / cap_j)
    int polish_every = 25;    // active-set Newton attempt period; 0 disables
    double active_threshold = 1e-6;  // relative size for a multiplier to count as active
};

// Fixed-term inputs: terms[j] is the decoder load of cap j.
struct FixedPointInputs {
    double energy = 0.0;
    RVec terms;
    RVec caps;
};

struct FixedPointSolution {
    RVec x;               // multipliers in CapSet order
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
    double eps = 0.0;
    bool polished = false;    // final point came from the Newton polish
    int polish_steps = 0;
};

double fixed_point_epsilon(double energy, const RVec& caps, double eps_rel);

// F_j(x) = max(eps, E x_j a_j / (cap_j sum_i x_i a_i))
RVec fixed_point_map(const RVec& x, const RVec& terms, const RVec& caps, double energy, double eps);

// Picard iteration with fixed terms, started from the all-equal point (or x0).
FixedPointSolution fixed_point_solve(const FixedPointInputs& in, const FixedPointOptions& opt, const RVec* x0 = nullptr);

// Terms are the loads of the interference MMSE decoders T(x), recomputed at each iterate.
// ifc must carry V and zeta; its noise fields are set to the returned solution.
FixedPointSolution fixed_point_solve_coupled(InterferenceTransceiver& ifc, const ChannelSet& ch, const CapSet& caps,
                                             double energy, const FixedPointOptions& opt);

// V = beta_bar W, T = B / beta_bar, zeta = weights (per stream). Noise fields left empty.
InterferenceTransceiver dl_to_if_wsmse(const DownlinkTransceiver& dl, const RVec& stream_weights, double beta_bar);
InterferenceTransceiver dl_to_if_symbolwise(const DownlinkTransceiver& dl, const RVec& eta, double beta_bar);
InterferenceTransceiver dl_to_if_userwise(const DownlinkTransceiver& dl, const RVec& eta_user, double beta_bar);

// sum_l zeta_l v_l^H R v_l
double transfer_energy(const InterferenceTransceiver& ifc, const NoiseModel& noise);

// Writes noise_diag, psi and mu from multipliers x ordered as in caps.
void assign_noise(InterferenceTransceiver& ifc, const CapSet& caps, const RVec& x);

// beta^2 = sum zeta v^H R v / sum t^H Delta t; B = beta T, W = V / beta.
DownlinkTransceiver if_to_dl_wsmse(const InterferenceTransceiver& ifc, const NoiseModel& noise, double* beta_sq = nullptr);
DownlinkTransceiver if_to_dl_symbolwise(const InterferenceTransceiver& ifc, const NoiseModel& noise, double* beta_sq = nullptr);
DownlinkTransceiver if_to_dl_userwise(const InterferenceTransceiver& ifc, const NoiseModel& noise, double* beta_sq = nullptr);

struct WsmseTransfer {
    InterferenceTransceiver ifc;  // after the interference MMSE update
    DownlinkTransceiver dl;       // transferred back
    double beta_bar_sq = 1.0;
    double beta_sq = 0.0;
    double energy = 0.0;
    FixedPointSolution fp;
    bool used_fixed_point = false;
};

// dl -> if (beta_bar = 1), coupled fixed point, interference MMSE, if -> dl.
WsmseTransfer wsmse_round_trip(const DownlinkTransceiver& dl, const ChannelSet& ch, const NoiseModel& noise,
                               const RVec& stream_weights, const CapSet& caps, const FixedPointOptions& opt);

// Delta = I, beta_bar^2 = P_max / tau; no fixed point.
InterferenceTransceiver total_power_dl_to_if_wsmse(const DownlinkTransceiver& dl, const NoiseModel& noise,
                                                   const RVec& stream_weights, double p_max);
WsmseTransfer total_power_transfer_wsmse(const DownlinkTransceiver& dl, const ChannelSet& ch, const NoiseModel& noise,
                                         const RVec& stream_weights, double p_max);

}  // namespace mimo
