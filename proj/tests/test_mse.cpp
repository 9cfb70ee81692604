#include <gtest/gtest.h>

#include "mimo/duality_wsmse.hpp"
#include "mimo/mse.hpp"
#include "mimo/verify.hpp"
#include "support.hpp"

using namespace mimo;
using namespace mimo::testing;

namespace {

// K = N = M = S = 1 with H = 1 and unit noise.
struct Scalar {
    SystemConfig cfg;
    ChannelSet ch;
    NoiseModel noise;
    Scalar()
    {
        cfg.K = 1;
        cfg.N = 1;
        cfg.M = {1};
        cfg.S = {1};
        cfg.fill_default_weights();
        ch.H = {CMat::Constant(1, 1, 1.0)};
        noise.R = {CMat::Constant(1, 1, 1.0)};
    }
};

}  // namespace

TEST(DownlinkMse, ZeroReceiverGivesUnitMse)
{
    const auto inst = reference_instance(CapMode::AntennaSymbol, 1);
    auto eng = make_engine(1, RngStream::Property, 10);
    DownlinkTransceiver dl = random_downlink(inst, eng);
    for (auto& W : dl.W) W.setZero();
    const RVec m = symbol_mses_dl(dl, inst.ch, inst.noise);
    for (Eigen::Index l = 0; l < m.size(); ++l) EXPECT_DOUBLE_EQ(m[l], 1.0);
    EXPECT_DOUBLE_EQ(user_mse_dl(dl, inst.ch, inst.noise, 0), 2.0);
    EXPECT_DOUBLE_EQ(wsmse_dl(dl, inst.ch, inst.noise, RVec::Ones(4), Granularity::Symbol), 4.0);
}

TEST(DownlinkMse, ScalarClosedForm)
{
    Scalar s;
    DownlinkTransceiver dl;
    dl.B = CMat::Constant(1, 1, 1.0);
    dl.W = mmse_receiver_dl(dl.B, s.ch, s.noise, s.cfg.S);
    EXPECT_NEAR(std::abs(dl.W[0](0, 0) - cd(0.5)), 0.0, 1e-15);
    EXPECT_NEAR(symbol_mse_dl(dl, s.ch, s.noise, 0, 0), 0.5, 1e-15);
    EXPECT_NEAR(user_mse_dl(dl, s.ch, s.noise, 0), 0.5, 1e-15);
    const auto id = mse_sinr_identity(dl, s.ch, s.noise, 0, 0);
    EXPECT_NEAR(id.sinr, 1.0, 1e-15);
    EXPECT_NEAR(id.mse, 0.5, 1e-15);
    EXPECT_NEAR(id.residual, 0.0, 1e-15);
}

TEST(DownlinkMse, MatchesExpansionOfReceivedSignal)
{
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto inst = reference_instance(CapMode::AntennaSymbol, seed);
        auto eng = make_engine(seed, RngStream::Property, 11);
        DownlinkTransceiver dl = random_downlink(inst, eng);
        for (auto& W : dl.W) W = random_cmat(eng, W.rows(), W.cols());
        const RVec m = symbol_mses_dl(dl, inst.ch, inst.noise);
        RVec eta(4);
        eta << 0.5, 1.0, 2.0, 3.0;
        double direct = 0.0;
        for (int k = 0; k < 2; ++k)
            for (int s = 0; s < 2; ++s) {
                const int l = inst.cfg.stream_offset(k) + s;
                const double ref = reference_symbol_mse(dl, inst.ch, inst.noise, k, s, inst.cfg.stream_offset(k));
                EXPECT_LT(rel(m[l], ref), 1e-10);
                direct += eta[l] * ref;
            }
        EXPECT_LT(rel(wsmse_dl(dl, inst.ch, inst.noise, eta, Granularity::Symbol), direct), 1e-10);
        for (int k = 0; k < 2; ++k)
            EXPECT_LT(rel(user_mse_dl(dl, inst.ch, inst.noise, k), m.segment(2 * k, 2).sum()), 1e-10);
    }
}

TEST(DownlinkMse, UserWeightsOfOneMatchSymbolSum)
{
    const auto inst = reference_instance(CapMode::AntennaSymbol, 4);
    auto eng = make_engine(4, RngStream::Property, 12);
    const DownlinkTransceiver dl = random_downlink(inst, eng);
    EXPECT_LT(rel(wsmse_dl(dl, inst.ch, inst.noise, RVec::Ones(2), Granularity::User),
                  wsmse_dl(dl, inst.ch, inst.noise, RVec::Ones(4), Granularity::Symbol)),
              1e-12);
}

TEST(DownlinkMse, MmseReceiverIsStationary)
{
    const auto inst = reference_instance(CapMode::AntennaSymbol, 5);
    auto eng = make_engine(5, RngStream::Property, 13);
    DownlinkTransceiver dl = random_downlink(inst, eng);
    const RVec base = symbol_mses_dl(dl, inst.ch, inst.noise);
    for (int trial = 0; trial < 20; ++trial) {
        DownlinkTransceiver p = dl;
        for (auto& W : p.W) W += 1e-3 * random_cmat(eng, W.rows(), W.cols());
        const RVec m = symbol_mses_dl(p, inst.ch, inst.noise);
        for (Eigen::Index l = 0; l < m.size(); ++l) EXPECT_GE(m[l], base[l] - 1e-14);
    }
}

TEST(DownlinkMse, ZeroPrecoderGivesZeroReceiver)
{
    const auto inst = reference_instance(CapMode::AntennaSymbol, 6);
    const auto W = mmse_receiver_dl(CMat::Zero(4, 4), inst.ch, inst.noise, inst.cfg.S);
    for (const auto& w : W) EXPECT_EQ(w.norm(), 0.0);
}

TEST(InterferenceMse, ZeroTransmitGivesZeta)
{
    const auto inst = reference_instance(CapMode::AntennaSymbol, 7);
    auto eng = make_engine(7, RngStream::Property, 14);
    const DownlinkTransceiver dl = random_downlink(inst, eng);
    RVec zeta(4);
    zeta << 0.3, 1.0, 1.7, 2.0;
    InterferenceTransceiver ifc = dl_to_if_wsmse(dl, zeta, 1.0);
    ifc.noise_diag = RMat::Ones(4, 4);
    ifc.T.setZero();
    const RVec m = symbol_mses_if(ifc, inst.ch);
    for (int l = 0; l < 4; ++l) EXPECT_NEAR(m[l], zeta[l], 1e-15);
}

TEST(InterferenceMse, MatchesTermByTermExpansion)
{
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto inst = reference_instance(CapMode::AntennaSymbol, seed);
        auto eng = make_engine(seed, RngStream::Property, 15);
        const DownlinkTransceiver dl = random_downlink(inst, eng);
        RVec zeta(4);
        for (int l = 0; l < 4; ++l) zeta[l] = uniform(eng, 0.5, 2.0);
        InterferenceTransceiver ifc = dl_to_if_wsmse(dl, zeta, 1.0);
        ifc.T = random_cmat(eng, 4, 4);
        ifc.noise_diag = RMat(4, 4);
        for (int i = 0; i < 16; ++i) ifc.noise_diag(i) = uniform(eng, 0.1, 1.0);
        const RVec m = symbol_mses_if(ifc, inst.ch);
        // x_hat_l = t_l^H (sum_j H_{k(j)} v_j x_j + n_l); E|x_hat - x|^2 with Var x_j = zeta_j
        for (int l = 0; l < 4; ++l) {
            const CVec t = ifc.T.col(l);
            double ref = 0.0;
            for (int j = 0; j < 4; ++j) {
                const int kj = inst.cfg.owner(j);
                cd g = t.dot(inst.ch.H[kj] * ifc.V[kj].col(j - inst.cfg.stream_offset(kj)));
                if (j == l) g -= 1.0;
                ref += zeta[j] * std::norm(g);
            }
            ref += t.cwiseAbs2().dot(ifc.noise_diag.col(l));
            EXPECT_LT(rel(m[l], ref), 1e-10);
        }
        EXPECT_LT(rel(user_mse_if(ifc, inst.ch, 1), m[2] + m[3]), 1e-10);
        EXPECT_LT(rel(wsmse_if(ifc, inst.ch, RVec::Ones(4), Granularity::Symbol), m.sum()), 1e-12);
    }
}

TEST(InterferenceMse, ScalarReceiver)
{
    Scalar s;
    InterferenceTransceiver ifc;
    ifc.V = {CMat::Constant(1, 1, cd(0.7, 0.2))};
    ifc.zeta = RVec::Constant(1, 1.5);
    ifc.T = CMat::Zero(1, 1);
    ifc.noise_diag = RMat::Constant(1, 1, 0.3 + 0.2);
    const cd hv = s.ch.H[0](0, 0) * ifc.V[0](0, 0);
    const cd expected = 1.5 * hv / (1.5 * std::norm(hv) + 0.5);
    const CVec t = mmse_receiver_if(ifc, s.ch, 0, 0);
    EXPECT_NEAR(std::abs(t[0] - expected), 0.0, 1e-15);
}

TEST(InterferenceMse, MmseReceiverIsStationary)
{
    const auto inst = reference_instance(CapMode::AntennaSymbol, 8);
    auto eng = make_engine(8, RngStream::Property, 16);
    const DownlinkTransceiver dl = random_downlink(inst, eng);
    InterferenceTransceiver ifc = dl_to_if_wsmse(dl, RVec::Ones(4), 1.0);
    ifc.noise_diag = RMat::Constant(4, 4, 0.4);
    ifc.T = mmse_receivers_if(ifc, inst.ch);
    const RVec base = symbol_mses_if(ifc, inst.ch);
    for (int trial = 0; trial < 20; ++trial) {
        InterferenceTransceiver p = ifc;
        p.T += 1e-3 * random_cmat(eng, 4, 4);
        const RVec m = symbol_mses_if(p, inst.ch);
        for (int l = 0; l < 4; ++l) EXPECT_GE(m[l], base[l] - 1e-12);
    }
    InterferenceTransceiver zero = ifc;
    for (auto& V : zero.V) V.setZero();
    EXPECT_EQ(mmse_receivers_if(zero, inst.ch).norm(), 0.0);
}

TEST(Powers, IdentityPrecoder)
{
    const auto p = powers(CMat::Identity(4, 4), {2, 2});
    EXPECT_TRUE(p.per_antenna.isApprox(RVec::Ones(4)));
    EXPECT_TRUE(p.per_symbol.isApprox(RVec::Ones(4)));
    EXPECT_TRUE(p.per_user.isApprox(RVec::Constant(2, 2.0)));
    EXPECT_DOUBLE_EQ(p.total, 4.0);
}

TEST(Powers, PartitionIdentities)
{
    auto eng = make_engine(9, RngStream::Property, 17);
    for (int trial = 0; trial < 50; ++trial) {
        const CMat B = random_cmat(eng, 5, 4);
        const auto p = powers(B, {1, 3});
        EXPECT_NEAR(p.per_antenna.sum(), p.total, 1e-12);
        EXPECT_NEAR(p.per_symbol.sum(), p.total, 1e-12);
        EXPECT_NEAR(p.per_user[1], p.per_symbol.tail(3).sum(), 1e-12);
        EXPECT_NEAR(p.total, B.squaredNorm(), 1e-12);
    }
}

TEST(SinrIdentity, HoldsAtMmseReceivers)
{
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto inst = reference_instance(CapMode::AntennaSymbol, seed);
        auto eng = make_engine(seed, RngStream::Property, 18);
        const DownlinkTransceiver dl = random_downlink(inst, eng);
        for (int k = 0; k < 2; ++k)
            for (int s = 0; s < 2; ++s) {
                const auto id = mse_sinr_identity(dl, inst.ch, inst.noise, k, s);
                EXPECT_LE(id.residual, 1e-10);
                EXPECT_LT(rel(id.mse, 1.0 / (1.0 + id.sinr)), 1e-10);
            }
    }
}

TEST(SinrIdentity, FailsAwayFromMmse)
{
    const auto inst = reference_instance(CapMode::AntennaSymbol, 3);
    auto eng = make_engine(3, RngStream::Property, 19);
    DownlinkTransceiver dl = random_downlink(inst, eng);
    for (auto& W : dl.W) W *= 0.5;
    double worst = 0.0;
    for (int k = 0; k < 2; ++k)
        for (int s = 0; s < 2; ++s) worst = std::max(worst, mse_sinr_identity(dl, inst.ch, inst.noise, k, s).residual);
    EXPECT_GT(worst, 1e-6);
}

TEST(MonteCarlo, ZeroReceiverEstimates)
{
    const auto inst = reference_instance(CapMode::AntennaSymbol, 2);
    auto eng = make_engine(2, RngStream::Property, 20);
    DownlinkTransceiver dl = random_downlink(inst, eng);
    for (auto& W : dl.W) W.setZero();
    const auto dl_est = monte_carlo_mse_dl(dl, inst.ch, inst.noise, 1, 0, 1 << 15, 5);
    EXPECT_NEAR(dl_est.estimate, 1.0, 5.0 * dl_est.standard_error);

    InterferenceTransceiver ifc = dl_to_if_wsmse(random_downlink(inst, eng), RVec::Constant(4, 1.7), 1.0);
    ifc.noise_diag = RMat::Ones(4, 4);
    ifc.T.setZero();
    const auto if_est = monte_carlo_mse_if(ifc, inst.ch, 1, 1, 1 << 16, 5);
    EXPECT_NEAR(if_est.estimate, 1.7, 5.0 * if_est.standard_error + 1e-12);
}

TEST(MonteCarlo, StandardErrorScalesWithSamples)
{
    const auto inst = reference_instance(CapMode::AntennaSymbol, 3);
    auto eng = make_engine(3, RngStream::Property, 21);
    const DownlinkTransceiver dl = random_downlink(inst, eng);
    const auto a = monte_carlo_mse_dl(dl, inst.ch, inst.noise, 0, 1, 1 << 17, 9);
    const auto b = monte_carlo_mse_dl(dl, inst.ch, inst.noise, 0, 1, 1 << 18, 9);
    EXPECT_NEAR(a.standard_error / b.standard_error, std::sqrt(2.0), 0.05);
}

TEST(MonteCarlo, AgreesWithClosedForm)
{
    const auto inst = reference_instance(CapMode::AntennaSymbol, 4);
    auto eng = make_engine(4, RngStream::Property, 22);
    DownlinkTransceiver dl = random_downlink(inst, eng);
    dl.W[0] *= 0.8;
    const auto est = monte_carlo_mse_dl(dl, inst.ch, inst.noise, 0, 0, 1 << 18, 11);
    EXPECT_LE(std::abs(est.estimate - symbol_mse_dl(dl, inst.ch, inst.noise, 0, 0)), 3.0 * est.standard_error);
}

TEST(MonteCarlo, SerialAndParallelAreBitwiseIdentical)
{
    const auto inst = reference_instance(CapMode::AntennaSymbol, 5);
    auto eng = make_engine(5, RngStream::Property, 23);
    const DownlinkTransceiver dl = random_downlink(inst, eng);
    const auto a = monte_carlo_mse_dl(dl, inst.ch, inst.noise, 1, 1, 100000, 3, Execution::Serial);
    const auto b = monte_carlo_mse_dl(dl, inst.ch, inst.noise, 1, 1, 100000, 3, Execution::Parallel);
    EXPECT_EQ(a.estimate, b.estimate);
    EXPECT_EQ(a.standard_error, b.standard_error);
}
