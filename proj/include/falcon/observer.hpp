#pragma once

#include <string>
#include <vector>

#include "falcon/simnet.hpp"

namespace falcon {

struct Violation {
    std::string check;
    std::string detail;
};

/// Cross-node invariant checks over a finished run. An empty result is a pass.
/// Instances 1..num_instances are checked; later drain instances only have to
/// exist for the liveness bound.
std::vector<Violation> observe_invariants(const Simulation& sim);

/// Slot-by-slot comparison of chains; exposed for detector tests.
std::vector<Violation> check_chain_safety(const std::vector<const Chain*>& chains);

std::string format_report(const std::vector<Violation>& violations);

}  // namespace falcon
