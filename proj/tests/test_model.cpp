#include <gtest/gtest.h>

#include "mimo/model.hpp"
#include "support.hpp"

using namespace mimo;

TEST(Channels, SameSeedSameDraws)
{
    const auto cfg = default_system();
    const auto a = generate_channels(cfg, 7);
    const auto b = generate_channels(cfg, 7);
    ASSERT_EQ(a.H.size(), 2u);
    for (int k = 0; k < 2; ++k) {
        EXPECT_EQ(a.H[k].rows(), 4);
        EXPECT_EQ(a.H[k].cols(), 2);
        EXPECT_TRUE(a.H[k] == b.H[k]);
    }
}

TEST(Channels, DifferentSeedsDiffer)
{
    const auto cfg = default_system();
    EXPECT_FALSE(generate_channels(cfg, 7).H[0] == generate_channels(cfg, 8).H[0]);
    EXPECT_FALSE(generate_channels(cfg, 7, 0).H[0] == generate_channels(cfg, 7, 1).H[0]);
}

TEST(Channels, UnitVarianceEntries)
{
    SystemConfig cfg;
    cfg.K = 1;
    cfg.N = 100;
    cfg.M = {1000};
    cfg.S = {1};
    cfg.fill_default_weights();
    const auto ch = generate_channels(cfg, 3);
    const double mean_sq = ch.H[0].cwiseAbs2().mean();
    EXPECT_NEAR(mean_sq, 1.0, 0.02);
    EXPECT_NEAR(std::abs(ch.H[0].mean()), 0.0, 0.02);
}

TEST(Noise, RatiosScaleFirstUser)
{
    const auto cfg = default_system();
    const auto nm = default_noise(cfg, 1.0);
    EXPECT_TRUE(nm.R[0].isApprox(CMat::Identity(2, 2)));
    EXPECT_TRUE(nm.R[1].isApprox(2.0 * CMat::Identity(2, 2)));
    Eigen::SelfAdjointEigenSolver<CMat> es(nm.block());
    RVec ev = es.eigenvalues();
    EXPECT_NEAR(ev[0], 1.0, 1e-15);
    EXPECT_NEAR(ev[1], 1.0, 1e-15);
    EXPECT_NEAR(ev[2], 2.0, 1e-15);
    EXPECT_NEAR(ev[3], 2.0, 1e-15);
}

TEST(Noise, RejectsNonpositiveVariance)
{
    const auto cfg = default_system();
    EXPECT_THROW(default_noise(cfg, 0.0), InvalidArgument);
    EXPECT_THROW(default_noise(cfg, -1.0), InvalidArgument);
    EXPECT_THROW(default_noise(cfg, 1.0, {1.0, -2.0}), InvalidArgument);
}

TEST(Snr, KnownPoints)
{
    EXPECT_NEAR(snr_to_sigma(10.0, 2, 0.0), 5.0, 1e-15);
    EXPECT_NEAR(snr_to_sigma(10.0, 2, 10.0), 0.5, 1e-15);
}

TEST(Snr, InversePairAndMonotone)
{
    double prev = 1e300;
    for (double snr = -10.0; snr <= 40.0; snr += 2.5) {
        const double s = snr_to_sigma(10.0, 2, snr);
        EXPECT_NEAR(sigma_to_snr(10.0, 2, s), snr, 1e-12);
        EXPECT_LT(s, prev);
        prev = s;
    }
}

TEST(Snr, AverageOfPerUserVariances)
{
    const std::vector<double> ratios{1.0, 2.0};
    const double s1 = sigma1_from_average(0.5, ratios);
    EXPECT_NEAR(0.5 * (s1 + 2.0 * s1), 0.5, 1e-15);
}

TEST(SystemConfig, Validation)
{
    auto cfg = default_system();
    EXPECT_NO_THROW(cfg.validate());
    cfg.S = {3, 2};
    EXPECT_THROW(cfg.validate(), InvalidArgument);
    cfg = default_system();
    cfg.N = 3;  // 4 streams on 3 antennas
    EXPECT_THROW(cfg.validate(), InvalidArgument);
    cfg = default_system();
    cfg.symbol_weights[1] = 0.0;
    EXPECT_THROW(cfg.validate(), InvalidArgument);
}

TEST(SystemConfig, StreamLayout)
{
    SystemConfig cfg;
    cfg.K = 3;
    cfg.N = 6;
    cfg.M = {2, 3, 1};
    cfg.S = {1, 3, 1};
    cfg.fill_default_weights();
    EXPECT_EQ(cfg.total_streams(), 5);
    EXPECT_EQ(cfg.stream_offset(2), 4);
    EXPECT_EQ(cfg.owner(0), 0);
    EXPECT_EQ(cfg.owner(3), 1);
    EXPECT_EQ(cfg.owner(4), 2);
}

TEST(Budget, ActiveCapsMustBePositive)
{
    const auto cfg = default_system();
    EXPECT_THROW(uniform_budget(cfg, CapMode::AntennaSymbol, 0.0, 2.5, 5.0, 1.0, 10.0).validate(cfg),
                 InvalidArgument);
    // inactive caps are not consulted
    EXPECT_NO_THROW(uniform_budget(cfg, CapMode::Total, 0.0, 0.0, 0.0, 0.0, 10.0).validate(cfg));
}
