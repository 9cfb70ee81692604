#pragma once

#include <vector>

#include "mimo/model.hpp"

namespace mimo {

enum class Granularity { Symbol, User };

struct DownlinkTransceiver {
    CMat B;                // N x S, columns ordered users outer
    std::vector<CMat> W;   // M_k x S_k per user
};

struct InterferenceTransceiver {
    std::vector<CMat> V;   // M_k x S_k per user
    CMat T;                // N x S
    RVec zeta;             // input variances, length S
    RMat noise_diag;       // N x S; column l is the diagonal of Delta_l
    RVec psi;              // length N (empty when Delta is not of the Psi + mu I form)
    RVec mu;               // length S or K
    RVec beta_bar;         // length 1 (WSMSE) or one per group (min-max)
};

struct MseReport {
    RVec symbol_mse;
    RVec user_mse;
    double wsmse = 0.0;
    double max_weighted = 0.0;
    int max_index = 0;
};

struct PowerReport {
    RVec per_antenna;
    RVec per_symbol;
    RVec per_user;
    double total = 0.0;
};

// Stream offsets derived from per-user block widths: offsets[k] .. offsets[k+1].
std::vector<int> block_offsets(const std::vector<CMat>& blocks);
std::vector<int> stream_owner(const std::vector<CMat>& blocks);

// Downlink
double symbol_mse_dl(const DownlinkTransceiver& dl, const ChannelSet& ch, const NoiseModel& noise, int k, int s);
double user_mse_dl(const DownlinkTransceiver& dl, const ChannelSet& ch, const NoiseModel& noise, int k);
RVec symbol_mses_dl(const DownlinkTransceiver& dl, const ChannelSet& ch, const NoiseModel& noise);
double wsmse_dl(const DownlinkTransceiver& dl, const ChannelSet& ch, const NoiseModel& noise, const RVec& weights,
                Granularity g);

// Interference channel
CMat interference_covariance(const InterferenceTransceiver& ifc, const ChannelSet& ch);
double symbol_mse_if(const InterferenceTransceiver& ifc, const ChannelSet& ch, int k, int s);
double user_mse_if(const InterferenceTransceiver& ifc, const ChannelSet& ch, int k);
RVec symbol_mses_if(const InterferenceTransceiver& ifc, const ChannelSet& ch);
double wsmse_if(const InterferenceTransceiver& ifc, const ChannelSet& ch, const RVec& weights, Granularity g);

// Receivers
std::vector<CMat> mmse_receiver_dl(const CMat& B, const ChannelSet& ch, const NoiseModel& noise,
                                   const std::vector<int>& S);
CVec mmse_receiver_if(const InterferenceTransceiver& ifc, const ChannelSet& ch, int k, int s);
CMat mmse_receivers_if(const InterferenceTransceiver& ifc, const ChannelSet& ch);

PowerReport powers(const CMat& B, const std::vector<int>& S);

struct SinrIdentity {
    double mse;
    double sinr;
    double residual;
};
SinrIdentity mse_sinr_identity(const DownlinkTransceiver& dl, const ChannelSet& ch, const NoiseModel& noise, int k,
                               int s);

// wsmse and max_weighted both use `weights` at granularity g.
MseReport mse_report(const DownlinkTransceiver& dl, const ChannelSet& ch, const NoiseModel& noise,
                     const RVec& weights, Granularity g);

}  // namespace mimo
