#pragma once

#include <string>

#include "mimo/model.hpp"
#include "mimo/mse.hpp"

namespace mimo {

enum class ProblemId { P1, P2, P3, P4, P5 };
enum class ObjectiveKind { WeightedSum, MinMax };

struct ProblemSpec {
    ProblemId id = ProblemId::P1;
    Granularity granularity = Granularity::Symbol;
    ObjectiveKind objective = ObjectiveKind::WeightedSum;
    bool total_power = false;

    CapMode cap_mode() const;
    // Per-stream weights entering the objective (eta, replicated eta tilde, rho, or replicated rho tilde).
    RVec stream_weights(const SystemConfig& cfg) const;
    // Weights at the problem's own granularity (length S or K).
    RVec weights(const SystemConfig& cfg) const;
};

ProblemSpec make_problem(ProblemId id, bool total_power = false);

// Accepts P1..P5 and P8 (alias of P3); case-insensitive.
ProblemSpec parse_problem(const std::string& name);
std::string problem_name(ProblemId id);

}  // namespace mimo
