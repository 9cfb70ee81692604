#pragma once

#include <cstdint>
#include <vector>

#include "mimo/types.hpp"

namespace mimo {

struct SystemConfig {
    int K = 2;
    int N = 4;
    std::vector<int> M{2, 2};
    std::vector<int> S{2, 2};
    RVec symbol_weights;   // eta, length total_streams()
    RVec user_weights;     // eta tilde, length K
    RVec symbol_balance;   // rho, length total_streams()
    RVec user_balance;     // rho tilde, length K

    int total_streams() const;
    int stream_offset(int k) const;
    int owner(int l) const;
    // Fills missing weight vectors with ones.
    void fill_default_weights();
    void validate() const;
};

// K=2, N=4, M=S=[2,2], unit weights.
SystemConfig default_system();

struct ChannelSet {
    std::vector<CMat> H;  // N x M_k per user
    CMat stacked() const;
};

struct NoiseModel {
    std::vector<CMat> R;  // M_k x M_k per user
    CMat block() const;
    void validate() const;
};

enum class CapMode {
    AntennaSymbol,  // per-antenna and per-symbol (P1, P3)
    AntennaUser,    // per-antenna and per-user (P2, P4)
    Entrywise,      // per (stream, antenna) entry (P5)
    Total,          // total BS power only
};

struct PowerBudget {
    CapMode mode = CapMode::AntennaSymbol;
    RVec per_antenna;  // length N
    RVec per_symbol;   // length S
    RVec per_user;     // length K
    RMat entrywise;    // N x S
    double total = 0.0;

    void validate(const SystemConfig& cfg) const;
};

// Uniform caps: antenna/symbol/user values broadcast, entrywise filled with `entry`.
PowerBudget uniform_budget(const SystemConfig& cfg, CapMode mode, double antenna_mw, double symbol_mw,
                           double user_mw, double entry_mw, double total_mw);

// Realization r of a sweep uses the same seed with index r.
ChannelSet generate_channels(const SystemConfig& cfg, std::uint64_t seed, std::uint64_t index = 0);

// R_k = ratio_k * sigma1^2 * I. An empty ratio list means [1, 2, 3, ...] scaled from [1, 2].
NoiseModel default_noise(const SystemConfig& cfg, double sigma1_sq, const std::vector<double>& ratios = {});

double snr_to_sigma(double p_max, int K, double snr_db);
double sigma_to_snr(double p_max, int K, double sigma_av_sq);

// sigma1^2 such that mean_k(ratio_k) * sigma1^2 equals sigma_av^2.
double sigma1_from_average(double sigma_av_sq, const std::vector<double>& ratios);

std::vector<double> default_noise_ratios(int K);

struct Instance {
    SystemConfig cfg;
    ChannelSet ch;
    NoiseModel noise;
    PowerBudget budget;
};

}  // namespace mimo
