#pragma once

#include <vector>

#include "mimo/model.hpp"

namespace mimo {

// A linear power constraint sum_{n,l} Q[n,l] |X(n,l)|^2 <= limit with 0/1 weights Q.
struct Cap {
    enum class Kind { Antenna, Symbol, User, Entry, Total };
    Kind kind;
    int a = 0;  // antenna, stream, or user index
    int b = 0;  // stream index for Entry
    double limit = 0.0;
};

// Ordered list of active caps for a budget; antennas first, then symbols/users/entries.
// Owns the stream layout so weights Q can be evaluated.
class CapSet {
  public:
    CapSet(const SystemConfig& cfg, const PowerBudget& budget);

    int size() const { return static_cast<int>(caps_.size()); }
    const Cap& operator[](int j) const { return caps_[j]; }
    RVec limits() const;
    int antennas() const { return N_; }
    int streams() const { return S_; }
    CapMode mode() const { return mode_; }

    // Q_j[n, l]
    bool weight(int j, int n, int l) const;

    // power_j(X) for every cap j.
    RVec loads(const CMat& X) const;
    // L(j, l) = sum_n Q_j[n,l] |X(n,l)|^2.
    RMat stream_loads(const CMat& X) const;
    // Noise diagonal of stream l: column l is sum_j x_j Q_j[:, l].
    RMat noise_diag(const RVec& x) const;

    // max_j power_j(X) / limit_j
    double max_ratio(const CMat& X) const;
    // max_j (power_j(X) - limit_j), in the cap's units
    double max_excess(const CMat& X) const;

  private:
    std::vector<Cap> caps_;
    std::vector<int> owner_;
    int N_;
    int S_;
    CapMode mode_;
};

}  // namespace mimo
