#include "mimo/mse.hpp"

#include <algorithm>

#include "mimo/linalg.hpp"

namespace mimo {

std::vector<int> block_offsets(const std::vector<CMat>& blocks)
{
    std::vector<int> off{0};
    for (const auto& b : blocks) off.push_back(off.back() + static_cast<int>(b.cols()));
    return off;
}

std::vector<int> stream_owner(const std::vector<CMat>& blocks)
{
    std::vector<int> own;
    for (int k = 0; k < static_cast<int>(blocks.size()); ++k)
        for (int s = 0; s < blocks[k].cols(); ++s) own.push_back(k);
    return own;
}

namespace {

void check_dl(const DownlinkTransceiver& dl, const ChannelSet& ch)
{
    require(dl.W.size() == ch.H.size(), "decoder blocks must match users");
    require(dl.B.cols() == block_offsets(dl.W).back(), "precoder columns must match streams");
    for (std::size_t k = 0; k < ch.H.size(); ++k) {
        require(dl.B.rows() == ch.H[k].rows(), "precoder rows must match N");
        require(dl.W[k].rows() == ch.H[k].cols(), "decoder rows must match M_k");
    }
}

}  // namespace

double symbol_mse_dl(const DownlinkTransceiver& dl, const ChannelSet& ch, const NoiseModel& noise, int k, int s)
{
    check_dl(dl, ch);
    const int l = block_offsets(dl.W)[k] + s;
    const CVec w = dl.W[k].col(s);
    const CVec hw = ch.H[k] * w;
    const CVec g = dl.B.adjoint() * hw;  // g_j = b_j^H H_k w
    const cd z = g.squaredNorm() + w.dot(noise.R[k] * w) - std::conj(g[l]) - g[l] + 1.0;
    return real_checked(z, "symbol MSE");
}

double user_mse_dl(const DownlinkTransceiver& dl, const ChannelSet& ch, const NoiseModel& noise, int k)
{
    check_dl(dl, ch);
    const int off = block_offsets(dl.W)[k];
    const CMat& W = dl.W[k];
    const CMat HW = ch.H[k] * W;
    const CMat G = dl.B.adjoint() * HW;
    const CMat C = G.middleRows(off, W.cols());  // B_k^H H_k W_k
    const cd z = G.squaredNorm() + (W.adjoint() * noise.R[k] * W).trace() - C.trace() - std::conj(C.trace()) +
                 static_cast<double>(W.cols());
    return real_checked(z, "user MSE");
}

RVec symbol_mses_dl(const DownlinkTransceiver& dl, const ChannelSet& ch, const NoiseModel& noise)
{
    const auto off = block_offsets(dl.W);
    RVec out(off.back());
    for (int k = 0; k < static_cast<int>(dl.W.size()); ++k)
        for (int s = 0; s < dl.W[k].cols(); ++s) out[off[k] + s] = symbol_mse_dl(dl, ch, noise, k, s);
    return out;
}

double wsmse_dl(const DownlinkTransceiver& dl, const ChannelSet& ch, const NoiseModel& noise, const RVec& weights,
                Granularity g)
{
    if (g == Granularity::Symbol) {
        const RVec m = symbol_mses_dl(dl, ch, noise);
        require(weights.size() == m.size(), "symbol weight length mismatch");
        return weights.dot(m);
    }
    require(weights.size() == static_cast<Eigen::Index>(dl.W.size()), "user weight length mismatch");
    double acc = 0.0;
    for (int k = 0; k < static_cast<int>(dl.W.size()); ++k) acc += weights[k] * user_mse_dl(dl, ch, noise, k);
    return acc;
}

CMat interference_covariance(const InterferenceTransceiver& ifc, const ChannelSet& ch)
{
    const Eigen::Index N = ch.H.front().rows();
    const auto off = block_offsets(ifc.V);
    CMat G = CMat::Zero(N, N);
    for (int k = 0; k < static_cast<int>(ifc.V.size()); ++k) {
        const CMat HV = ch.H[k] * ifc.V[k];
        for (int s = 0; s < HV.cols(); ++s) G.noalias() += ifc.zeta[off[k] + s] * HV.col(s) * HV.col(s).adjoint();
    }
    return G;
}

namespace {

void check_if(const InterferenceTransceiver& ifc, const ChannelSet& ch)
{
    const int S = block_offsets(ifc.V).back();
    require(ifc.V.size() == ch.H.size(), "precoder blocks must match users");
    require(ifc.zeta.size() == S, "zeta length must match streams");
    require(ifc.noise_diag.rows() == ch.H.front().rows() && ifc.noise_diag.cols() == S, "noise shape");
}

double symbol_mse_if_with(const InterferenceTransceiver& ifc, const ChannelSet& ch, const CMat& Gamma, int k, int s,
                          const CVec& t)
{
    const int l = block_offsets(ifc.V)[k] + s;
    const CVec hv = ch.H[k] * ifc.V[k].col(s);
    const double zeta = ifc.zeta[l];
    const cd th = t.dot(hv);  // t^H H v
    const cd z = t.dot(Gamma * t) + t.dot(ifc.noise_diag.col(l).cast<cd>().cwiseProduct(t)) -
                 zeta * (th + std::conj(th)) + zeta;
    return real_checked(z, "interference symbol MSE");
}

}  // namespace

double symbol_mse_if(const InterferenceTransceiver& ifc, const ChannelSet& ch, int k, int s)
{
    check_if(ifc, ch);
    const CMat Gamma = interference_covariance(ifc, ch);
    return symbol_mse_if_with(ifc, ch, Gamma, k, s, ifc.T.col(block_offsets(ifc.V)[k] + s));
}

RVec symbol_mses_if(const InterferenceTransceiver& ifc, const ChannelSet& ch)
{
    check_if(ifc, ch);
    const CMat Gamma = interference_covariance(ifc, ch);
    const auto off = block_offsets(ifc.V);
    RVec out(off.back());
    for (int k = 0; k < static_cast<int>(ifc.V.size()); ++k)
        for (int s = 0; s < ifc.V[k].cols(); ++s)
            out[off[k] + s] = symbol_mse_if_with(ifc, ch, Gamma, k, s, ifc.T.col(off[k] + s));
    return out;
}

double user_mse_if(const InterferenceTransceiver& ifc, const ChannelSet& ch, int k)
{
    const auto off = block_offsets(ifc.V);
    return symbol_mses_if(ifc, ch).segment(off[k], ifc.V[k].cols()).sum();
}

double wsmse_if(const InterferenceTransceiver& ifc, const ChannelSet& ch, const RVec& weights, Granularity g)
{
    const RVec m = symbol_mses_if(ifc, ch);
    if (g == Granularity::Symbol) {
        require(weights.size() == m.size(), "symbol weight length mismatch");
        return weights.dot(m);
    }
    require(weights.size() == static_cast<Eigen::Index>(ifc.V.size()), "user weight length mismatch");
    const auto off = block_offsets(ifc.V);
    double acc = 0.0;
    for (int k = 0; k < static_cast<int>(ifc.V.size()); ++k)
        acc += weights[k] * m.segment(off[k], ifc.V[k].cols()).sum();
    return acc;
}

std::vector<CMat> mmse_receiver_dl(const CMat& B, const ChannelSet& ch, const NoiseModel& noise,
                                   const std::vector<int>& S)
{
    std::vector<CMat> W;
    int off = 0;
    for (std::size_t k = 0; k < ch.H.size(); ++k) {
        const CMat HB = ch.H[k].adjoint() * B;  // M_k x S
        const CMat A = HB * HB.adjoint() + noise.R[k];
        W.push_back(hermitian_solve(A, HB.middleCols(off, S[k])));
        off += S[k];
    }
    return W;
}

CVec mmse_receiver_if(const InterferenceTransceiver& ifc, const ChannelSet& ch, int k, int s)
{
    check_if(ifc, ch);
    const int l = block_offsets(ifc.V)[k] + s;
    require((ifc.noise_diag.col(l).array() > 0.0).all(), "interference noise must be positive");
    CMat A = interference_covariance(ifc, ch);
    A.diagonal() += ifc.noise_diag.col(l).cast<cd>();
    return hermitian_solve(A, ch.H[k] * ifc.V[k].col(s) * ifc.zeta[l]);
}

CMat mmse_receivers_if(const InterferenceTransceiver& ifc, const ChannelSet& ch)
{
    check_if(ifc, ch);
    require((ifc.noise_diag.array() > 0.0).all(), "interference noise must be positive");
    const CMat Gamma = interference_covariance(ifc, ch);
    const auto off = block_offsets(ifc.V);
    CMat T(Gamma.rows(), off.back());
    for (int k = 0; k < static_cast<int>(ifc.V.size()); ++k)
        for (int s = 0; s < ifc.V[k].cols(); ++s) {
            const int l = off[k] + s;
            CMat A = Gamma;
            A.diagonal() += ifc.noise_diag.col(l).cast<cd>();
            T.col(l) = hermitian_solve(A, ch.H[k] * ifc.V[k].col(s) * ifc.zeta[l]);
        }
    return T;
}

PowerReport powers(const CMat& B, const std::vector<int>& S)
{
    const RMat P = B.cwiseAbs2();
    PowerReport r;
    r.per_antenna = P.rowwise().sum();
    r.per_symbol = P.colwise().sum().transpose();
    r.per_user = RVec::Zero(static_cast<Eigen::Index>(S.size()));
    int off = 0;
    for (std::size_t k = 0; k < S.size(); ++k) {
        r.per_user[k] = r.per_symbol.segment(off, S[k]).sum();
        off += S[k];
    }
    r.total = P.sum();
    return r;
}

SinrIdentity mse_sinr_identity(const DownlinkTransceiver& dl, const ChannelSet& ch, const NoiseModel& noise, int k,
                               int s)
{
    const int l = block_offsets(dl.W)[k] + s;
    const CVec w = dl.W[k].col(s);
    const CVec g = dl.B.adjoint() * (ch.H[k] * w);
    const double signal = std::norm(g[l]);
    const double interference = g.squaredNorm() - signal;
    const double nz = real_checked(w.dot(noise.R[k] * w), "noise power");
    SinrIdentity out;
    out.mse = symbol_mse_dl(dl, ch, noise, k, s);
    out.sinr = signal / (interference + nz);
    out.residual = std::abs(out.mse - 1.0 / (1.0 + out.sinr));
    return out;
}

MseReport mse_report(const DownlinkTransceiver& dl, const ChannelSet& ch, const NoiseModel& noise,
                     const RVec& weights, Granularity g)
{
    MseReport r;
    r.symbol_mse = symbol_mses_dl(dl, ch, noise);
    const auto off = block_offsets(dl.W);
    r.user_mse.resize(static_cast<Eigen::Index>(dl.W.size()));
    for (std::size_t k = 0; k < dl.W.size(); ++k) r.user_mse[k] = r.symbol_mse.segment(off[k], dl.W[k].cols()).sum();
    const RVec& base = g == Granularity::Symbol ? r.symbol_mse : r.user_mse;
    require(weights.size() == base.size(), "weight length mismatch");
    const RVec weighted = weights.cwiseProduct(base);
    r.wsmse = weighted.sum();
    Eigen::Index idx = 0;
    r.max_weighted = weighted.maxCoeff(&idx);
    r.max_index = static_cast<int>(idx);
    return r;
}

}  // namespace mimo
