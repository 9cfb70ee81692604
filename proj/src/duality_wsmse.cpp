#include "mimo/duality_wsmse.hpp"

#include <cmath>

#include "mimo/linalg.hpp"
#include "newton_polish.hpp"

namespace mimo {

double fixed_point_epsilon(double energy, const RVec& caps, double eps_rel)
{
    return eps_rel * (energy / caps.array()).minCoeff();
}

RVec fixed_point_map(const RVec& x, const RVec& terms, const RVec& caps, double energy, double eps)
{
    const double D = x.dot(terms);
    if (!(D > 0.0)) throw InvalidArgument("fixed-point map needs a nonzero decoder load");
    RVec F = (energy / D) * x.cwiseProduct(terms).cwiseQuotient(caps);
    return F.cwiseMax(eps);
}

namespace {

double relative_residual(const RVec& x, const RVec& F)
{
    return (x - F).cwiseAbs().maxCoeff() / x.cwiseAbs().maxCoeff();
}

// Stops when x is a fixed point to tol and no cap would be exceeded: the transfer at x
// loads cap j by cap_j F_j(x) / x_j, so max_j F_j / x_j <= 1 + tol is also required.
// Returns the evaluated iterate x, not F(x).
// With polish_every > 0, an active-set Newton solve is attempted periodically; its point is
// accepted only if it passes the same test.
template <class Terms>
FixedPointSolution picard(const RVec& caps, double energy, const FixedPointOptions& opt, RVec x, Terms&& terms)
{
    require(energy > 0.0 && std::isfinite(energy), "transfer energy must be positive");
    require((caps.array() > 0.0).all(), "caps must be positive");
    FixedPointSolution sol;
    sol.eps = fixed_point_epsilon(energy, caps, opt.eps_rel);
    x = x.cwiseMax(sol.eps);
    auto accept = [&](const RVec& xx, const RVec& F) {
        sol.residual = relative_residual(xx, F);
        return sol.residual <= opt.tol && F.cwiseQuotient(xx).maxCoeff() <= 1.0 + opt.tol;
    };
    for (int it = 1; it <= opt.max_iter; ++it) {
        const RVec F = fixed_point_map(x, terms(x), caps, energy, sol.eps);
        sol.iterations = it;
        if (accept(x, F)) {
            sol.converged = true;
            break;
        }
        if (opt.polish_every > 0 && it % opt.polish_every == 0) {
            auto ratio = [&](const RVec& xx) {
                const RVec a = terms(xx);
                return RVec((energy / xx.dot(a)) * a.cwiseQuotient(caps));
            };
            auto check = [&](const RVec& xx) {
                return accept(xx, fixed_point_map(xx, terms(xx), caps, energy, sol.eps));
            };
            const auto polished = detail::polish_active_set(ratio, x, sol.eps, opt.active_threshold, check,
                                                            sol.polish_steps);
            if (polished) {
                x = *polished;
                sol.converged = true;
                sol.polished = true;
                break;
            }
            sol.residual = relative_residual(x, F);
        }
        if (it == opt.max_iter) break;
        x = F;
    }
    sol.x = x;
    return sol;
}

}  // namespace

FixedPointSolution fixed_point_solve(const FixedPointInputs& in, const FixedPointOptions& opt, const RVec* x0)
{
    require(in.terms.size() == in.caps.size(), "terms and caps must match");
    require((in.terms.array() >= 0.0).all(), "terms must be nonnegative");
    const RVec start = x0 ? *x0 : RVec::Constant(in.caps.size(), in.energy / in.caps.sum());
    return picard(in.caps, in.energy, opt, start, [&](const RVec&) -> const RVec& { return in.terms; });
}

FixedPointSolution fixed_point_solve_coupled(InterferenceTransceiver& ifc, const ChannelSet& ch, const CapSet& caps,
                                             double energy, const FixedPointOptions& opt)
{
    const RVec limits = caps.limits();
    const RVec start = RVec::Constant(caps.size(), energy / limits.sum());
    auto terms = [&](const RVec& x) {
        ifc.noise_diag = caps.noise_diag(x);
        return RVec(caps.loads(mmse_receivers_if(ifc, ch)));
    };
    FixedPointSolution sol = picard(limits, energy, opt, start, terms);
    assign_noise(ifc, caps, sol.x);
    return sol;
}

InterferenceTransceiver dl_to_if_wsmse(const DownlinkTransceiver& dl, const RVec& stream_weights, double beta_bar)
{
    require(beta_bar > 0.0, "beta_bar must be positive");
    require(dl.B.norm() > 0.0, "zero precoder cannot be transferred");
    require(stream_weights.size() == dl.B.cols(), "weight length must match streams");
    InterferenceTransceiver ifc;
    for (const auto& w : dl.W) ifc.V.push_back(beta_bar * w);
    ifc.T = dl.B / beta_bar;
    ifc.zeta = stream_weights;
    ifc.beta_bar = RVec::Constant(1, beta_bar);
    return ifc;
}

InterferenceTransceiver dl_to_if_symbolwise(const DownlinkTransceiver& dl, const RVec& eta, double beta_bar)
{
    return dl_to_if_wsmse(dl, eta, beta_bar);
}

InterferenceTransceiver dl_to_if_userwise(const DownlinkTransceiver& dl, const RVec& eta_user, double beta_bar)
{
    require(eta_user.size() == static_cast<Eigen::Index>(dl.W.size()), "user weight length mismatch");
    const auto own = stream_owner(dl.W);
    RVec z(static_cast<Eigen::Index>(own.size()));
    for (std::size_t l = 0; l < own.size(); ++l) z[l] = eta_user[own[l]];
    return dl_to_if_wsmse(dl, z, beta_bar);
}

double transfer_energy(const InterferenceTransceiver& ifc, const NoiseModel& noise)
{
    const auto off = block_offsets(ifc.V);
    double e = 0.0;
    for (std::size_t k = 0; k < ifc.V.size(); ++k)
        for (int s = 0; s < ifc.V[k].cols(); ++s) {
            const CVec v = ifc.V[k].col(s);
            e += ifc.zeta[off[k] + s] * real_checked(v.dot(noise.R[k] * v), "noise quadratic form");
        }
    return e;
}

void assign_noise(InterferenceTransceiver& ifc, const CapSet& caps, const RVec& x)
{
    ifc.noise_diag = caps.noise_diag(x);
    ifc.psi.resize(0);
    ifc.mu.resize(0);
    if (caps.mode() == CapMode::AntennaSymbol || caps.mode() == CapMode::AntennaUser) {
        ifc.psi = x.head(caps.antennas());
        ifc.mu = x.tail(caps.size() - caps.antennas());
    }
}

DownlinkTransceiver if_to_dl_wsmse(const InterferenceTransceiver& ifc, const NoiseModel& noise, double* beta_sq)
{
    double denom = 0.0;
    for (int l = 0; l < ifc.T.cols(); ++l) denom += ifc.noise_diag.col(l).dot(ifc.T.col(l).cwiseAbs2());
    if (!(denom > 0.0)) throw InvalidArgument("zero interference decoder cannot be transferred");
    const double b2 = transfer_energy(ifc, noise) / denom;
    const double b = std::sqrt(b2);
    DownlinkTransceiver dl;
    dl.B = b * ifc.T;
    for (const auto& v : ifc.V) dl.W.push_back(v / b);
    if (beta_sq) *beta_sq = b2;
    return dl;
}

DownlinkTransceiver if_to_dl_symbolwise(const InterferenceTransceiver& ifc, const NoiseModel& noise, double* beta_sq)
{
    return if_to_dl_wsmse(ifc, noise, beta_sq);
}

DownlinkTransceiver if_to_dl_userwise(const InterferenceTransceiver& ifc, const NoiseModel& noise, double* beta_sq)
{
    return if_to_dl_wsmse(ifc, noise, beta_sq);
}

WsmseTransfer wsmse_round_trip(const DownlinkTransceiver& dl, const ChannelSet& ch, const NoiseModel& noise,
                               const RVec& stream_weights, const CapSet& caps, const FixedPointOptions& opt)
{
    WsmseTransfer out;
    out.ifc = dl_to_if_wsmse(dl, stream_weights, 1.0);
    out.energy = transfer_energy(out.ifc, noise);
    out.fp = fixed_point_solve_coupled(out.ifc, ch, caps, out.energy, opt);
    out.used_fixed_point = true;
    out.ifc.T = mmse_receivers_if(out.ifc, ch);
    out.dl = if_to_dl_wsmse(out.ifc, noise, &out.beta_sq);
    return out;
}

InterferenceTransceiver total_power_dl_to_if_wsmse(const DownlinkTransceiver& dl, const NoiseModel& noise,
                                                   const RVec& stream_weights, double p_max)
{
    require(p_max > 0.0, "P_max must be positive");
    InterferenceTransceiver probe = dl_to_if_wsmse(dl, stream_weights, 1.0);
    const double tau = transfer_energy(probe, noise);
    require(tau > 0.0, "zero decoder: tau vanishes");
    InterferenceTransceiver ifc = dl_to_if_wsmse(dl, stream_weights, std::sqrt(p_max / tau));
    ifc.noise_diag = RMat::Ones(dl.B.rows(), dl.B.cols());
    return ifc;
}

WsmseTransfer total_power_transfer_wsmse(const DownlinkTransceiver& dl, const ChannelSet& ch, const NoiseModel& noise,
                                         const RVec& stream_weights, double p_max)
{
    WsmseTransfer out;
    out.ifc = total_power_dl_to_if_wsmse(dl, noise, stream_weights, p_max);
    out.beta_bar_sq = out.ifc.beta_bar[0] * out.ifc.beta_bar[0];
    out.energy = transfer_energy(out.ifc, noise);
    out.ifc.T = mmse_receivers_if(out.ifc, ch);
    out.dl = if_to_dl_wsmse(out.ifc, noise, &out.beta_sq);
    return out;
}

}  // namespace mimo
