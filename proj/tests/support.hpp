#pragma once

#include <cmath>
#include <random>

#include "mimo/constraints.hpp"
#include "mimo/model.hpp"
#include "mimo/mse.hpp"
#include "mimo/rng.hpp"

namespace mimo::testing {

inline cd cn01(std::mt19937_64& eng)
{
    std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
    const double re = nd(eng);
    return {re, nd(eng)};
}

inline CMat random_cmat(std::mt19937_64& eng, int rows, int cols)
{
    CMat A(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) A(i, j) = cn01(eng);
    return A;
}

inline double uniform(std::mt19937_64& eng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(eng);
}

// Reference setup at a given SNR with channels from `seed`.
inline Instance reference_instance(CapMode mode, std::uint64_t seed, double snr_db = 10.0)
{
    Instance inst;
    inst.cfg = default_system();
    inst.ch = generate_channels(inst.cfg, seed);
    const auto ratios = default_noise_ratios(inst.cfg.K);
    inst.noise = default_noise(inst.cfg, sigma1_from_average(snr_to_sigma(10.0, inst.cfg.K, snr_db), ratios), ratios);
    inst.budget = uniform_budget(inst.cfg, mode, 2.5, 2.5, 5.0, 1.25, 10.0);
    return inst;
}

// Random precoder scaled strictly inside the caps, with MMSE receivers.
inline DownlinkTransceiver random_downlink(const Instance& inst, std::mt19937_64& eng, double fill = 0.8)
{
    const CapSet caps(inst.cfg, inst.budget);
    DownlinkTransceiver dl;
    dl.B = random_cmat(eng, inst.cfg.N, inst.cfg.total_streams());
    dl.B *= std::sqrt(fill / caps.max_ratio(dl.B));
    dl.W = mmse_receiver_dl(dl.B, inst.ch, inst.noise, inst.cfg.S);
    return dl;
}

// Expected |w^H y - d|^2 written out from the received-signal model y = H^H B d + n.
inline double reference_symbol_mse(const DownlinkTransceiver& dl, const ChannelSet& ch, const NoiseModel& noise,
                                   int k, int s, int offset)
{
    const CVec w = dl.W[k].col(s);
    CVec e = (w.adjoint() * ch.H[k].adjoint() * dl.B).transpose().conjugate();
    e(offset + s) -= 1.0;
    return e.squaredNorm() + std::real(w.dot(noise.R[k] * w));
}

inline double rel(double a, double b)
{
    return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

}  // namespace mimo::testing
