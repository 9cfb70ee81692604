#include "mimo/model.hpp"

#include <cmath>
#include <numeric>

#include "mimo/linalg.hpp"
#include "mimo/rng.hpp"

namespace mimo {

int SystemConfig::total_streams() const
{
    return std::accumulate(S.begin(), S.end(), 0);
}

int SystemConfig::stream_offset(int k) const
{
    return std::accumulate(S.begin(), S.begin() + k, 0);
}

int SystemConfig::owner(int l) const
{
    for (int k = 0, off = 0; k < K; ++k) {
        off += S[k];
        if (l < off) return k;
    }
    throw InvalidArgument("stream index out of range");
}

void SystemConfig::fill_default_weights()
{
    const int St = total_streams();
    if (symbol_weights.size() == 0) symbol_weights = RVec::Ones(St);
    if (user_weights.size() == 0) user_weights = RVec::Ones(K);
    if (symbol_balance.size() == 0) symbol_balance = RVec::Ones(St);
    if (user_balance.size() == 0) user_balance = RVec::Ones(K);
}

static void check_weights(const RVec& w, int n, const char* name)
{
    require(w.size() == n, std::string(name) + " has wrong length");
    for (int i = 0; i < n; ++i)
        require(std::isfinite(w[i]) && w[i] > 0.0, std::string(name) + " entries must be positive and finite");
}

void SystemConfig::validate() const
{
    require(K >= 1, "K must be >= 1");
    require(N >= 1, "N must be >= 1");
    require(static_cast<int>(M.size()) == K && static_cast<int>(S.size()) == K, "M and S need K entries");
    for (int k = 0; k < K; ++k) {
        require(M[k] >= 1, "M_k must be >= 1");
        require(S[k] >= 1 && S[k] <= M[k], "need 1 <= S_k <= M_k");
    }
    require(total_streams() <= N, "total streams must not exceed N");
    check_weights(symbol_weights, total_streams(), "symbol_weights");
    check_weights(user_weights, K, "user_weights");
    check_weights(symbol_balance, total_streams(), "symbol_balance");
    check_weights(user_balance, K, "user_balance");
}

SystemConfig default_system()
{
    SystemConfig cfg;
    cfg.fill_default_weights();
    return cfg;
}

CMat ChannelSet::stacked() const
{
    Eigen::Index cols = 0;
    for (const auto& h : H) cols += h.cols();
    CMat out(H.empty() ? 0 : H[0].rows(), cols);
    Eigen::Index c = 0;
    for (const auto& h : H) {
        out.middleCols(c, h.cols()) = h;
        c += h.cols();
    }
    return out;
}

CMat NoiseModel::block() const
{
    return block_diag(R);
}

void NoiseModel::validate() const
{
    for (const auto& r : R) {
        require(r.rows() == r.cols(), "noise covariance must be square");
        require((r - r.adjoint()).cwiseAbs().maxCoeff() <= 1e-12, "noise covariance must be Hermitian");
        Eigen::SelfAdjointEigenSolver<CMat> es(r);
        require(es.eigenvalues().minCoeff() > 0.0, "noise covariance must be positive definite");
    }
}

void PowerBudget::validate(const SystemConfig& cfg) const
{
    auto positive = [](const auto& v, const char* name) {
        require(v.size() > 0 && (v.array() > 0.0).all() && v.allFinite(), std::string(name) + " caps must be positive");
    };
    switch (mode) {
    case CapMode::AntennaSymbol:
        positive(per_antenna, "per-antenna");
        positive(per_symbol, "per-symbol");
        require(per_antenna.size() == cfg.N && per_symbol.size() == cfg.total_streams(), "cap lengths");
        break;
    case CapMode::AntennaUser:
        positive(per_antenna, "per-antenna");
        positive(per_user, "per-user");
        require(per_antenna.size() == cfg.N && per_user.size() == cfg.K, "cap lengths");
        break;
    case CapMode::Entrywise:
        positive(entrywise.reshaped(), "entrywise");
        require(entrywise.rows() == cfg.N && entrywise.cols() == cfg.total_streams(), "entrywise cap shape");
        break;
    case CapMode::Total:
        require(std::isfinite(total) && total > 0.0, "total power cap must be positive");
        break;
    }
}

PowerBudget uniform_budget(const SystemConfig& cfg, CapMode mode, double antenna_mw, double symbol_mw, double user_mw,
                           double entry_mw, double total_mw)
{
    PowerBudget b;
    b.mode = mode;
    b.per_antenna = RVec::Constant(cfg.N, antenna_mw);
    b.per_symbol = RVec::Constant(cfg.total_streams(), symbol_mw);
    b.per_user = RVec::Constant(cfg.K, user_mw);
    b.entrywise = RMat::Constant(cfg.N, cfg.total_streams(), entry_mw);
    b.total = total_mw;
    return b;
}

ChannelSet generate_channels(const SystemConfig& cfg, std::uint64_t seed, std::uint64_t index)
{
    cfg.validate();
    auto eng = make_engine(seed, RngStream::Channel, index);
    // CN(0,1): real and imaginary parts each N(0, 1/2)
    std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
    ChannelSet ch;
    for (int k = 0; k < cfg.K; ++k) {
        CMat h(cfg.N, cfg.M[k]);
        for (int c = 0; c < h.cols(); ++c)
            for (int r = 0; r < h.rows(); ++r) {
                const double re = nd(eng);
                const double im = nd(eng);
                h(r, c) = cd(re, im);
            }
        ch.H.push_back(std::move(h));
    }
    return ch;
}

std::vector<double> default_noise_ratios(int K)
{
    std::vector<double> r(K);
    for (int k = 0; k < K; ++k) r[k] = 1.0 + k;
    return r;
}

NoiseModel default_noise(const SystemConfig& cfg, double sigma1_sq, const std::vector<double>& ratios)
{
    require(sigma1_sq > 0.0 && std::isfinite(sigma1_sq), "noise variance must be positive");
    const auto r = ratios.empty() ? default_noise_ratios(cfg.K) : ratios;
    require(static_cast<int>(r.size()) == cfg.K, "need one noise ratio per user");
    NoiseModel nm;
    for (int k = 0; k < cfg.K; ++k) {
        require(r[k] > 0.0, "noise ratios must be positive");
        nm.R.push_back(CMat::Identity(cfg.M[k], cfg.M[k]) * (r[k] * sigma1_sq));
    }
    return nm;
}

double snr_to_sigma(double p_max, int K, double snr_db)
{
    return p_max / (K * std::pow(10.0, snr_db / 10.0));
}

double sigma_to_snr(double p_max, int K, double sigma_av_sq)
{
    return 10.0 * std::log10(p_max / (K * sigma_av_sq));
}

double sigma1_from_average(double sigma_av_sq, const std::vector<double>& ratios)
{
    require(!ratios.empty(), "empty ratio list");
    const double mean = std::accumulate(ratios.begin(), ratios.end(), 0.0) / ratios.size();
    return sigma_av_sq / mean;
}

}  // namespace mimo
