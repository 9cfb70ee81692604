#include "mimo/problem.hpp"

#include <algorithm>
#include <cctype>

namespace mimo {

CapMode ProblemSpec::cap_mode() const
{
    if (total_power) return CapMode::Total;
    switch (id) {
    case ProblemId::P1:
    case ProblemId::P3: return CapMode::AntennaSymbol;
    case ProblemId::P2:
    case ProblemId::P4: return CapMode::AntennaUser;
    case ProblemId::P5: return CapMode::Entrywise;
    }
    return CapMode::AntennaSymbol;
}

RVec ProblemSpec::weights(const SystemConfig& cfg) const
{
    const bool minmax = objective == ObjectiveKind::MinMax;
    if (granularity == Granularity::Symbol) return minmax ? cfg.symbol_balance : cfg.symbol_weights;
    return minmax ? cfg.user_balance : cfg.user_weights;
}

RVec ProblemSpec::stream_weights(const SystemConfig& cfg) const
{
    const RVec w = weights(cfg);
    if (granularity == Granularity::Symbol) return w;
    RVec out(cfg.total_streams());
    for (int l = 0; l < out.size(); ++l) out[l] = w[cfg.owner(l)];
    return out;
}

ProblemSpec make_problem(ProblemId id, bool total_power)
{
    ProblemSpec p;
    p.id = id;
    p.total_power = total_power;
    p.granularity = (id == ProblemId::P2 || id == ProblemId::P4) ? Granularity::User : Granularity::Symbol;
    p.objective = (id == ProblemId::P3 || id == ProblemId::P4) ? ObjectiveKind::MinMax : ObjectiveKind::WeightedSum;
    return p;
}

ProblemSpec parse_problem(const std::string& name)
{
    std::string s = name;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
    if (s == "P1") return make_problem(ProblemId::P1);
    if (s == "P2") return make_problem(ProblemId::P2);
    if (s == "P3" || s == "P8") return make_problem(ProblemId::P3);
    if (s == "P4") return make_problem(ProblemId::P4);
    if (s == "P5") return make_problem(ProblemId::P5);
    throw InvalidArgument("unknown problem '" + name + "' (expected P1-P5 or P8)");
}

std::string problem_name(ProblemId id)
{
    switch (id) {
    case ProblemId::P1: return "P1";
    case ProblemId::P2: return "P2";
    case ProblemId::P3: return "P3";
    case ProblemId::P4: return "P4";
    case ProblemId::P5: return "P5";
    }
    return "?";
}

}  // namespace mimo
