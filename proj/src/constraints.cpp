#include "mimo/constraints.hpp"

namespace mimo {

CapSet::CapSet(const SystemConfig& cfg, const PowerBudget& budget)
    : N_(cfg.N), S_(cfg.total_streams()), mode_(budget.mode)
{
    budget.validate(cfg);
    for (int l = 0; l < S_; ++l) owner_.push_back(cfg.owner(l));
    using K = Cap::Kind;
    switch (budget.mode) {
    case CapMode::AntennaSymbol:
        for (int n = 0; n < N_; ++n) caps_.push_back({K::Antenna, n, 0, budget.per_antenna[n]});
        for (int l = 0; l < S_; ++l) caps_.push_back({K::Symbol, l, 0, budget.per_symbol[l]});
        break;
    case CapMode::AntennaUser:
        for (int n = 0; n < N_; ++n) caps_.push_back({K::Antenna, n, 0, budget.per_antenna[n]});
        for (int k = 0; k < cfg.K; ++k) caps_.push_back({K::User, k, 0, budget.per_user[k]});
        break;
    case CapMode::Entrywise:
        for (int l = 0; l < S_; ++l)
            for (int n = 0; n < N_; ++n) caps_.push_back({K::Entry, n, l, budget.entrywise(n, l)});
        break;
    case CapMode::Total:
        caps_.push_back({K::Total, 0, 0, budget.total});
        break;
    }
}

RVec CapSet::limits() const
{
    RVec v(size());
    for (int j = 0; j < size(); ++j) v[j] = caps_[j].limit;
    return v;
}

bool CapSet::weight(int j, int n, int l) const
{
    const Cap& c = caps_[j];
    switch (c.kind) {
    case Cap::Kind::Antenna: return n == c.a;
    case Cap::Kind::Symbol: return l == c.a;
    case Cap::Kind::User: return owner_[l] == c.a;
    case Cap::Kind::Entry: return n == c.a && l == c.b;
    case Cap::Kind::Total: return true;
    }
    return false;
}

RMat CapSet::stream_loads(const CMat& X) const
{
    const RMat P = X.cwiseAbs2();
    RMat L = RMat::Zero(size(), S_);
    for (int j = 0; j < size(); ++j) {
        const Cap& c = caps_[j];
        switch (c.kind) {
        case Cap::Kind::Antenna: L.row(j) = P.row(c.a); break;
        case Cap::Kind::Symbol: L(j, c.a) = P.col(c.a).sum(); break;
        case Cap::Kind::User:
            for (int l = 0; l < S_; ++l)
                if (owner_[l] == c.a) L(j, l) = P.col(l).sum();
            break;
        case Cap::Kind::Entry: L(j, c.b) = P(c.a, c.b); break;
        case Cap::Kind::Total: L.row(j) = P.colwise().sum(); break;
        }
    }
    return L;
}

RVec CapSet::loads(const CMat& X) const
{
    return stream_loads(X).rowwise().sum();
}

RMat CapSet::noise_diag(const RVec& x) const
{
    RMat D = RMat::Zero(N_, S_);
    for (int j = 0; j < size(); ++j) {
        const Cap& c = caps_[j];
        switch (c.kind) {
        case Cap::Kind::Antenna: D.row(c.a).array() += x[j]; break;
        case Cap::Kind::Symbol: D.col(c.a).array() += x[j]; break;
        case Cap::Kind::User:
            for (int l = 0; l < S_; ++l)
                if (owner_[l] == c.a) D.col(l).array() += x[j];
            break;
        case Cap::Kind::Entry: D(c.a, c.b) += x[j]; break;
        case Cap::Kind::Total: D.array() += x[j]; break;
        }
    }
    return D;
}

double CapSet::max_ratio(const CMat& X) const
{
    return (loads(X).array() / limits().array()).maxCoeff();
}

double CapSet::max_excess(const CMat& X) const
{
    return (loads(X) - limits()).maxCoeff();
}

}  // namespace mimo
