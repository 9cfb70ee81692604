#include <gtest/gtest.h>

#include "mimo/duality_minmax.hpp"
#include "mimo/verify.hpp"
#include "support.hpp"

using namespace mimo;
using namespace mimo::testing;

namespace {

RVec random_multipliers(const CapSet& caps, std::mt19937_64& eng)
{
    RVec x(caps.size());
    for (int j = 0; j < caps.size(); ++j) x[j] = uniform(eng, 0.05, 2.0);
    return x;
}

Grouping grouping_for(CapMode mode, const SystemConfig& cfg)
{
    return mode == CapMode::AntennaSymbol ? Grouping::per_stream(cfg.total_streams()) : Grouping::per_user(cfg.S);
}

RVec group_sums(const RVec& per_stream, const Grouping& grp)
{
    RVec out = RVec::Zero(grp.size());
    for (int g = 0; g < grp.size(); ++g)
        for (int l : grp.groups[g]) out[g] += per_stream[l];
    return out;
}

}  // namespace

TEST(StructuredInverse, IdentityMatrix)
{
    const auto r = structured_inverse_check(RMat::Identity(5, 5));
    EXPECT_EQ(r.min_inverse_entry, 0.0);
    EXPECT_NEAR(r.inverse_one_norm, 1.0, 1e-15);
}

TEST(StructuredInverse, TwoByTwoByHand)
{
    RMat A(2, 2);
    A << 1.5, -0.3, -0.5, 1.3;
    // det = 1.8, inverse = [[1.3, 0.3], [0.5, 1.5]] / 1.8
    const auto r = structured_inverse_check(A);
    EXPECT_NEAR(r.min_inverse_entry, 0.3 / 1.8, 1e-15);
    EXPECT_NEAR(r.inverse_one_norm, 1.0, 1e-15);
}

TEST(StructuredInverse, RandomStructuredMatrices)
{
    for (int n = 2; n <= 12; ++n)
        for (std::uint64_t i = 0; i < 20; ++i) {
            const RMat A = random_structured_matrix(n, 17, i);
            const auto r = structured_inverse_check(A);
            EXPECT_GE(r.min_inverse_entry, -1e-12);
            EXPECT_NEAR(r.inverse_one_norm, 1.0, 1e-9);
        }
}

TEST(StructuredInverse, RejectsUnstructuredInput)
{
    RMat A(2, 2);
    A << 1.0, 0.2, 0.0, 0.8;
    EXPECT_THROW(structured_inverse_check(A), InvalidArgument);
}

TEST(BetaBar, SingleStreamClosedForm)
{
    Instance inst;
    inst.cfg.K = 1;
    inst.cfg.N = 2;
    inst.cfg.M = {2};
    inst.cfg.S = {1};
    inst.cfg.fill_default_weights();
    inst.ch = generate_channels(inst.cfg, 3);
    inst.noise = default_noise(inst.cfg, 0.7);
    auto eng = make_engine(3, RngStream::Property, 40);
    DownlinkTransceiver dl;
    dl.B = random_cmat(eng, 2, 1);
    dl.W = {random_cmat(eng, 2, 1)};
    RVec psi(2), mu(1);
    psi << 0.4, 1.3;
    mu << 0.25;
    const CVec b = dl.B.col(0);
    const CVec w = dl.W[0].col(0);
    const double expected = (b.cwiseAbs2().dot(psi) + mu[0] * b.squaredNorm()) / std::real(w.dot(inst.noise.R[0] * w));
    const RVec bb = solve_beta_bar_symbolwise(dl, inst.ch, inst.noise, psi, mu);
    EXPECT_LT(rel(bb[0], expected), 1e-12);
    // single user, single stream: per-user and per-stream coincide
    EXPECT_LT(rel(solve_beta_bar_userwise(dl, inst.ch, inst.noise, psi, mu)[0], expected), 1e-12);
}

TEST(BetaBar, PositiveForRandomMultipliers)
{
    const auto inst = reference_instance(CapMode::AntennaSymbol, 4);
    auto eng = make_engine(4, RngStream::Property, 41);
    const DownlinkTransceiver dl = random_downlink(inst, eng);
    for (int trial = 0; trial < 1000; ++trial) {
        RVec psi(4), mu(4);
        for (int i = 0; i < 4; ++i) psi[i] = uniform(eng, 1e-3, 3.0), mu[i] = uniform(eng, 1e-3, 3.0);
        EXPECT_GT(solve_beta_bar_symbolwise(dl, inst.ch, inst.noise, psi, mu).minCoeff(), 0.0);
    }
}

TEST(MinmaxTransfer, BothLegsPreserveEveryGroupMse)
{
    for (CapMode mode : {CapMode::AntennaSymbol, CapMode::AntennaUser})
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const auto inst = reference_instance(mode, seed);
            const CapSet caps(inst.cfg, inst.budget);
            const Grouping grp = grouping_for(mode, inst.cfg);
            auto eng = make_engine(seed, RngStream::Property, 42);
            const DownlinkTransceiver dl = random_downlink(inst, eng);
            const RMat D = caps.noise_diag(random_multipliers(caps, eng));

            InterferenceTransceiver ifc = dl_to_if_minmax(dl, inst.ch, inst.noise, grp, D);
            const RVec d0 = group_sums(symbol_mses_dl(dl, inst.ch, inst.noise), grp);
            const RVec i0 = group_sums(symbol_mses_if(ifc, inst.ch), grp);
            for (int g = 0; g < grp.size(); ++g) EXPECT_LT(rel(i0[g], d0[g]), 1e-10);

            ifc.T = mmse_receivers_if(ifc, inst.ch);
            const DownlinkTransceiver back = if_to_dl_minmax(ifc, inst.ch, inst.noise, grp);
            const RVec i1 = group_sums(symbol_mses_if(ifc, inst.ch), grp);
            const RVec d1 = group_sums(symbol_mses_dl(back, inst.ch, inst.noise), grp);
            for (int g = 0; g < grp.size(); ++g) EXPECT_LT(rel(d1[g], i1[g]), 1e-10);
        }
}

TEST(MinmaxTransfer, FactoredSolveMatchesDirectSolve)
{
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto inst = reference_instance(CapMode::AntennaSymbol, seed);
        const CapSet caps(inst.cfg, inst.budget);
        const Grouping grp = Grouping::per_stream(4);
        auto eng = make_engine(seed, RngStream::Property, 43);
        const DownlinkTransceiver dl = random_downlink(inst, eng);
        const RMat D = caps.noise_diag(random_multipliers(caps, eng));
        const CouplingSystem dsys = downlink_coupling(dl, inst.ch, inst.noise, grp, D);
        const InterferenceTransceiver ifc = dl_to_if_minmax(dl, inst.ch, inst.noise, grp, D);
        const CouplingSystem isys = interference_coupling(ifc, inst.ch, inst.noise, grp);
        const RVec direct = isys.solve();
        const RVec factored = solve_beta_factored(dsys, isys);
        for (int l = 0; l < 4; ++l) EXPECT_LT(rel(factored[l], direct[l]), 1e-10);
        // both coupling matrices have the structured-inverse form
        for (const RMat& A : {dsys.structured(), isys.structured()}) {
            const auto r = structured_inverse_check(A);
            EXPECT_GE(r.min_inverse_entry, -1e-12);
            EXPECT_NEAR(r.inverse_one_norm, 1.0, 1e-9);
        }
    }
}

TEST(SwitchedIteration, CertificateFeasibilityPositivity)
{
    for (CapMode mode : {CapMode::AntennaSymbol, CapMode::AntennaUser})
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            const auto inst = reference_instance(mode, seed);
            const CapSet caps(inst.cfg, inst.budget);
            auto eng = make_engine(seed, RngStream::Property, 44);
            const DownlinkTransceiver dl = random_downlink(inst, eng);
            SwitchedOptions opt;
            opt.record = true;
            const SwitchedResult r = mode == CapMode::AntennaSymbol
                                         ? switched_iteration_symbolwise(dl, inst.ch, inst.noise, caps, opt)
                                         : switched_iteration_userwise(dl, inst.ch, inst.noise, caps, opt);
            ASSERT_TRUE(r.converged) << "seed " << seed;
            ASSERT_FALSE(r.trace.empty());
            for (const auto& it : r.trace) EXPECT_LE(it.J_norm, 1.0 + 1e-10);
            EXPECT_LE(r.max_J_norm, 1.0 + 1e-10);
            EXPECT_GT(r.min_x_prime, 0.0);
            const auto sm = switching_map(dl, inst.ch, inst.noise, grouping_for(mode, inst.cfg), caps, r.x_prime);
            EXPECT_LE(caps.max_excess(sm.dl.B), 1e-9);
        }
}

TEST(MinmaxTransfer, RoundTripRespectsCaps)
{
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto inst = reference_instance(CapMode::AntennaUser, seed);
        const CapSet caps(inst.cfg, inst.budget);
        auto eng = make_engine(seed, RngStream::Property, 45);
        const DownlinkTransceiver dl = random_downlink(inst, eng);
        const auto tr = minmax_round_trip(dl, inst.ch, inst.noise, Grouping::per_user(inst.cfg.S), caps,
                                          SwitchedOptions{});
        EXPECT_TRUE(tr.used_switched);
        EXPECT_LE(caps.max_excess(tr.dl.B), 1e-9);
        EXPECT_GT(tr.beta_sq.minCoeff(), 0.0);
    }
}

TEST(MinmaxTransfer, TotalPowerLandsOnBudget)
{
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto inst = reference_instance(CapMode::Total, seed);
        auto eng = make_engine(seed, RngStream::Property, 46);
        DownlinkTransceiver dl;
        dl.B = random_cmat(eng, 4, 4);
        dl.B *= std::sqrt(7.0) / dl.B.norm();
        dl.W = mmse_receiver_dl(dl.B, inst.ch, inst.noise, inst.cfg.S);
        const Grouping grp = Grouping::per_stream(4);
        const auto tr = total_power_transfer_minmax(dl, inst.ch, inst.noise, grp, 10.0);
        EXPECT_FALSE(tr.used_switched);
        EXPECT_EQ(tr.sw.iterations, 0);
        EXPECT_LT(rel(tr.dl.B.squaredNorm(), 10.0), 1e-9);
        const RVec mi = symbol_mses_if(tr.ifc, inst.ch);
        const RVec md = symbol_mses_dl(tr.dl, inst.ch, inst.noise);
        for (int l = 0; l < 4; ++l) EXPECT_LT(rel(md[l], mi[l]), 1e-10);
    }
}
