#include "mimo/duality_minmax.hpp"

#include <cmath>

#include "newton_polish.hpp"
#include "mimo/linalg.hpp"

namespace mimo {

Grouping Grouping::per_stream(int S)
{
    Grouping g;
    for (int l = 0; l < S; ++l) {
        g.groups.push_back({l});
        g.group_of.push_back(l);
    }
    return g;
}

Grouping Grouping::per_user(const std::vector<int>& S)
{
    Grouping g;
    int l = 0;
    for (std::size_t k = 0; k < S.size(); ++k) {
        g.groups.emplace_back();
        for (int s = 0; s < S[k]; ++s, ++l) {
            g.groups.back().push_back(l);
            g.group_of.push_back(static_cast<int>(k));
        }
    }
    return g;
}

RMat CouplingSystem::matrix() const
{
    RMat A = Y;
    A.diagonal() += diag;
    return A;
}

RMat CouplingSystem::structured() const
{
    RMat A = Y * diag.cwiseInverse().asDiagonal();
    A.diagonal().array() += 1.0;
    return A;
}

RVec CouplingSystem::solve() const
{
    return dense_solve(matrix(), rhs);
}

namespace {

// Per-stream column views over per-user blocks.
struct StreamView {
    std::vector<int> owner;
    std::vector<int> local;
    explicit StreamView(const std::vector<CMat>& blocks)
    {
        for (int k = 0; k < static_cast<int>(blocks.size()); ++k)
            for (int s = 0; s < blocks[k].cols(); ++s) {
                owner.push_back(k);
                local.push_back(s);
            }
    }
    CVec col(const std::vector<CMat>& blocks, int l) const { return blocks[owner[l]].col(local[l]); }
};

// Y(g,g) = sum_{g' != g} X(g,g'), Y(g,g') = -X(g',g); X(g,g') is interference into receiver g from group g'.
RMat coupling_from_cross(const RMat& X)
{
    const Eigen::Index G = X.rows();
    RMat Y = -X.transpose();
    for (Eigen::Index g = 0; g < G; ++g) Y(g, g) = X.row(g).sum() - X(g, g);
    return Y;
}

int group_owner(const Grouping& grp, const StreamView& sv, int g)
{
    return sv.owner[grp.groups[g].front()];
}

double noise_form(const CVec& v, const CMat& R)
{
    return real_checked(v.dot(R * v), "noise quadratic form");
}

}  // namespace

CouplingSystem downlink_coupling(const DownlinkTransceiver& dl, const ChannelSet& ch, const NoiseModel& noise,
                                 const Grouping& grp, const RMat& noise_diag)
{
    const StreamView sv(dl.W);
    const int G = grp.size();
    RMat X = RMat::Zero(G, G);
    CouplingSystem sys;
    sys.diag = RVec::Zero(G);
    sys.rhs = RVec::Zero(G);
    for (int g = 0; g < G; ++g) {
        const int k = group_owner(grp, sv, g);
        for (int l : grp.groups[g]) {
            const CVec w = sv.col(dl.W, l);
            const CVec c = dl.B.adjoint() * (ch.H[k] * w);  // c_j = b_j^H H_k w_l
            for (int j = 0; j < c.size(); ++j) X(g, grp.group_of[j]) += std::norm(c[j]);
            sys.diag[g] += noise_form(w, noise.R[k]);
            sys.rhs[g] += noise_diag.col(l).dot(dl.B.col(l).cwiseAbs2());
        }
    }
    sys.Y = coupling_from_cross(X);
    return sys;
}

CouplingSystem interference_coupling(const InterferenceTransceiver& ifc, const ChannelSet& ch, const NoiseModel& noise,
                                     const Grouping& grp)
{
    const StreamView sv(ifc.V);
    const int G = grp.size();
    const int S = static_cast<int>(sv.owner.size());
    // Hv_j = H_{k(j)} v_j
    CMat Hv(ch.H.front().rows(), S);
    for (int j = 0; j < S; ++j) Hv.col(j) = ch.H[sv.owner[j]] * sv.col(ifc.V, j);
    RMat X = RMat::Zero(G, G);
    CouplingSystem sys;
    sys.diag = RVec::Zero(G);
    sys.rhs = RVec::Zero(G);
    for (int g = 0; g < G; ++g) {
        for (int l : grp.groups[g]) {
            const CVec t = ifc.T.col(l);
            const CVec c = Hv.adjoint() * t;  // conj(t_l^H H v_j)
            for (int j = 0; j < S; ++j) X(g, grp.group_of[j]) += std::norm(c[j]);
            double om = ifc.noise_diag.col(l).dot(t.cwiseAbs2());
            if (t.norm() < 1e-12) om = std::max(om, ifc.noise_diag.col(l).minCoeff() * 1e-24);
            sys.diag[g] += om;
            sys.rhs[g] += noise_form(sv.col(ifc.V, l), noise.R[sv.owner[l]]);
        }
    }
    sys.Y = coupling_from_cross(X);
    return sys;
}

InterferenceTransceiver dl_to_if_minmax(const DownlinkTransceiver& dl, const ChannelSet& ch, const NoiseModel& noise,
                                        const Grouping& grp, const RMat& noise_diag, double rhs_scale)
{
    require(noise_diag.rows() == dl.B.rows() && noise_diag.cols() == dl.B.cols(), "noise shape");
    require((noise_diag.array() > 0.0).all(), "interference noise must be positive");
    CouplingSystem sys = downlink_coupling(dl, ch, noise, grp, noise_diag);
    require((sys.diag.array() > 0.0).all(), "zero decoder group cannot be transferred");
    sys.rhs *= rhs_scale;
    const RVec bb2 = sys.solve();
    if (!((bb2.array() > 0.0).all())) throw InternalError("nonpositive beta_bar^2 from coupling system");
    InterferenceTransceiver ifc;
    ifc.V = dl.W;
    ifc.T = dl.B;
    const StreamView sv(dl.W);
    for (int l = 0; l < dl.B.cols(); ++l) {
        const double bb = std::sqrt(bb2[grp.group_of[l]]);
        ifc.V[sv.owner[l]].col(sv.local[l]) *= bb;
        ifc.T.col(l) /= bb;
    }
    ifc.zeta = RVec::Ones(dl.B.cols());
    ifc.noise_diag = noise_diag;
    ifc.beta_bar = bb2.cwiseSqrt();
    return ifc;
}

DownlinkTransceiver if_to_dl_minmax(const InterferenceTransceiver& ifc, const ChannelSet& ch, const NoiseModel& noise,
                                    const Grouping& grp, RVec* beta_sq)
{
    const CouplingSystem sys = interference_coupling(ifc, ch, noise, grp);
    const RVec b2 = sys.solve();
    if (!((b2.array() > 0.0).all())) throw InternalError("nonpositive beta^2 from coupling system");
    DownlinkTransceiver dl;
    dl.B = ifc.T;
    dl.W = ifc.V;
    const StreamView sv(ifc.V);
    for (int l = 0; l < dl.B.cols(); ++l) {
        const double b = std::sqrt(b2[grp.group_of[l]]);
        dl.B.col(l) *= b;
        dl.W[sv.owner[l]].col(sv.local[l]) /= b;
    }
    if (beta_sq) *beta_sq = b2;
    return dl;
}

namespace {

RMat psi_mu_diag(const RVec& psi, const RVec& mu, const std::vector<int>& mu_index)
{
    RMat D(psi.size(), static_cast<Eigen::Index>(mu_index.size()));
    for (std::size_t l = 0; l < mu_index.size(); ++l) D.col(l) = psi.array() + mu[mu_index[l]];
    return D;
}

std::vector<int> identity_index(int S)
{
    std::vector<int> v(S);
    for (int l = 0; l < S; ++l) v[l] = l;
    return v;
}

}  // namespace

RVec solve_beta_bar_symbolwise(const DownlinkTransceiver& dl, const ChannelSet& ch, const NoiseModel& noise,
                               const RVec& psi, const RVec& mu)
{
    const int S = static_cast<int>(dl.B.cols());
    require(mu.size() == S, "mu must have one entry per stream");
    return downlink_coupling(dl, ch, noise, Grouping::per_stream(S), psi_mu_diag(psi, mu, identity_index(S))).solve();
}

RVec solve_beta_bar_userwise(const DownlinkTransceiver& dl, const ChannelSet& ch, const NoiseModel& noise,
                             const RVec& psi, const RVec& mu)
{
    require(mu.size() == static_cast<Eigen::Index>(dl.W.size()), "mu must have one entry per user");
    std::vector<int> S;
    for (const auto& w : dl.W) S.push_back(static_cast<int>(w.cols()));
    return downlink_coupling(dl, ch, noise, Grouping::per_user(S), psi_mu_diag(psi, mu, stream_owner(dl.W))).solve();
}

RVec solve_beta_symbolwise(const InterferenceTransceiver& ifc, const ChannelSet& ch, const NoiseModel& noise)
{
    return interference_coupling(ifc, ch, noise, Grouping::per_stream(static_cast<int>(ifc.T.cols()))).solve();
}

RVec solve_beta_userwise(const InterferenceTransceiver& ifc, const ChannelSet& ch, const NoiseModel& noise)
{
    std::vector<int> S;
    for (const auto& v : ifc.V) S.push_back(static_cast<int>(v.cols()));
    return interference_coupling(ifc, ch, noise, Grouping::per_user(S)).solve();
}

RVec solve_beta_factored(const CouplingSystem& dl_sys, const CouplingSystem& if_sys)
{
    const RVec r = dense_solve(dl_sys.structured(), dl_sys.rhs);
    return dense_solve(if_sys.structured(), r).cwiseQuotient(if_sys.diag);
}

SwitchingMap switching_map(const DownlinkTransceiver& dl, const ChannelSet& ch, const NoiseModel& noise,
                           const Grouping& grp, const CapSet& caps, const RVec& x_prime)
{
    const RVec limits = caps.limits();
    const RVec x = x_prime.cwiseQuotient(limits);
    const RMat D = caps.noise_diag(x);
    const int G = grp.size();
    const int J = caps.size();

    const CouplingSystem dsys = downlink_coupling(dl, ch, noise, grp, D);
    SwitchingMap m;
    m.beta_bar_sq = dsys.solve();
    m.ifc = dl_to_if_minmax(dl, ch, noise, grp, D);
    m.ifc.T = mmse_receivers_if(m.ifc, ch);
    const CouplingSystem isys = interference_coupling(m.ifc, ch, noise, grp);
    m.beta_sq = isys.solve();
    m.dl = if_to_dl_minmax(m.ifc, ch, noise, grp);

    auto grouped = [&](const RMat& L) {
        RMat out = RMat::Zero(J, G);
        for (int l = 0; l < L.cols(); ++l) out.col(grp.group_of[l]) += L.col(l);
        return out;
    };
    const RMat P = grouped(caps.stream_loads(dl.B)).transpose();             // G x J
    const RMat Om = x.asDiagonal() * grouped(caps.stream_loads(m.ifc.T));    // J x G
    const RMat inner = isys.structured().partialPivLu().solve(dsys.structured().partialPivLu().solve(P));
    m.J = Om * isys.diag.cwiseInverse().asDiagonal() * inner * limits.cwiseInverse().asDiagonal();
    return m;
}

SwitchedResult switched_iteration(const DownlinkTransceiver& dl, const ChannelSet& ch, const NoiseModel& noise,
                                  const Grouping& grp, const CapSet& caps, const SwitchedOptions& opt, const RVec* x0)
{
    SwitchedResult r;
    RVec xp;
    if (x0) {
        xp = *x0;
    } else {
        double scale = 0.0;
        for (const auto& w : dl.W) scale += (w.adjoint() * w).trace().real();
        xp = RVec::Constant(caps.size(), std::max(scale, 1e-12) / caps.size());
    }
    require((xp.array() > 0.0).all(), "switched iteration needs a positive start");
    const double mass = xp.sum();
    const double floor = 1e-200 * mass;
    // normalized map x' -> x' .* ratio(x')
    auto ratio = [&](const RVec& v) {
        const RVec jx = switching_map(dl, ch, noise, grp, caps, v).J * v;
        return RVec(jx.cwiseQuotient(v) * (mass / jx.sum()));
    };
    // Newton on the active multipliers; kept only if the plain stopping test passes there.
    auto try_polish = [&](RVec& v) {
        auto check = [&](const RVec& c) {
            const SwitchingMap m = switching_map(dl, ch, noise, grp, caps, c);
            const RVec jx = m.J * c;
            const RVec nx = (jx * (mass / jx.sum())).cwiseMax(floor);
            const double res = (nx - c).cwiseAbs().maxCoeff() / c.cwiseAbs().maxCoeff();
            if (res > opt.tol || jx.cwiseQuotient(c).maxCoeff() > 1.0 + opt.tol) return false;
            r.residual = res;
            r.max_J_norm = std::max(r.max_J_norm, one_norm(m.J));
            return true;
        };
        const auto polished =
            detail::polish_active_set(ratio, v, floor, opt.active_threshold, check, r.polish_steps);
        if (!polished) return false;
        v = *polished;
        return true;
    };
    for (int it = 1; it <= opt.max_iter; ++it) {
        const SwitchingMap m = switching_map(dl, ch, noise, grp, caps, xp);
        const double jn = one_norm(m.J);
        r.max_J_norm = std::max(r.max_J_norm, jn);
        const RVec jx = m.J * xp;
        // (J x')_j / x'_j is the post-transfer load of cap j relative to its limit
        const double load = jx.cwiseQuotient(xp).maxCoeff();
        RVec next = jx * (mass / jx.sum());
        next = next.cwiseMax(floor);
        r.residual = (next - xp).cwiseAbs().maxCoeff() / xp.cwiseAbs().maxCoeff();
        r.iterations = it;
        if (opt.record) r.trace.push_back({jn, r.residual});
        if (r.residual <= opt.tol && load <= 1.0 + opt.tol) {
            r.converged = true;
            break;
        }
        if (opt.polish_every > 0 && it % opt.polish_every == 0 && try_polish(xp)) {
            r.converged = true;
            r.polished = true;
            break;
        }
        if (it == opt.max_iter) break;
        xp = next;
    }
    r.x_prime = xp;
    r.x = xp.cwiseQuotient(caps.limits());
    r.min_x_prime = xp.minCoeff();
    return r;
}

SwitchedResult switched_iteration_symbolwise(const DownlinkTransceiver& dl, const ChannelSet& ch,
                                             const NoiseModel& noise, const CapSet& caps, const SwitchedOptions& opt)
{
    return switched_iteration(dl, ch, noise, Grouping::per_stream(static_cast<int>(dl.B.cols())), caps, opt);
}

SwitchedResult switched_iteration_userwise(const DownlinkTransceiver& dl, const ChannelSet& ch, const NoiseModel& noise,
                                           const CapSet& caps, const SwitchedOptions& opt)
{
    std::vector<int> S;
    for (const auto& w : dl.W) S.push_back(static_cast<int>(w.cols()));
    return switched_iteration(dl, ch, noise, Grouping::per_user(S), caps, opt);
}

MinmaxTransfer minmax_round_trip(const DownlinkTransceiver& dl, const ChannelSet& ch, const NoiseModel& noise,
                                 const Grouping& grp, const CapSet& caps, const SwitchedOptions& opt)
{
    MinmaxTransfer out;
    out.sw = switched_iteration(dl, ch, noise, grp, caps, opt);
    out.used_switched = true;
    SwitchingMap m = switching_map(dl, ch, noise, grp, caps, out.sw.x_prime);
    out.sw.max_J_norm = std::max(out.sw.max_J_norm, one_norm(m.J));
    out.ifc = std::move(m.ifc);
    if (caps.mode() == CapMode::AntennaSymbol || caps.mode() == CapMode::AntennaUser) {
        out.ifc.psi = out.sw.x.head(caps.antennas());
        out.ifc.mu = out.sw.x.tail(caps.size() - caps.antennas());
    }
    out.dl = std::move(m.dl);
    out.beta_bar_sq = m.beta_bar_sq;
    out.beta_sq = m.beta_sq;
    return out;
}

MinmaxTransfer total_power_transfer_minmax(const DownlinkTransceiver& dl, const ChannelSet& ch, const NoiseModel& noise,
                                           const Grouping& grp, double p_max)
{
    require(p_max > 0.0, "P_max must be positive");
    const double used = dl.B.squaredNorm();
    require(used > 0.0, "zero precoder cannot be transferred");
    MinmaxTransfer out;
    const RMat D = RMat::Ones(dl.B.rows(), dl.B.cols());
    out.ifc = dl_to_if_minmax(dl, ch, noise, grp, D, p_max / used);
    out.beta_bar_sq = out.ifc.beta_bar.cwiseAbs2();
    out.ifc.T = mmse_receivers_if(out.ifc, ch);
    out.dl = if_to_dl_minmax(out.ifc, ch, noise, grp, &out.beta_sq);
    return out;
}

StructuredInverseReport structured_inverse_check(const RMat& A)
{
    require(A.rows() == A.cols() && A.rows() > 0, "structured_inverse_check needs a square matrix");
    const Eigen::Index n = A.rows();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (i != j) require(A(i, j) <= 1e-12, "off-diagonal entries must be nonpositive");
    StructuredInverseReport r;
    r.column_sum_residual = (A.colwise().sum().array() - 1.0).abs().maxCoeff();
    require(r.column_sum_residual <= 1e-8, "columns must sum to one");
    const RMat inv = A.partialPivLu().inverse();
    r.min_inverse_entry = inv.minCoeff();
    r.inverse_one_norm = one_norm(inv);
    return r;
}

}  // namespace mimo
