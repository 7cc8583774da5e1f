#pragma once

#include <optional>

#include "planted/csp.hpp"

namespace planted {

// Query access to one constraint set per tuple. The simulator's provider is
// the production implementation; tests plug in hand-built sources. nullopt
// means the source has no constraint for that tuple (uninformative data),
// which callers surface as a structured failure, never as an answer.
class ConstraintSource {
public:
    virtual ~ConstraintSource() = default;
    virtual std::optional<ConstraintSet> query(const VarTuple& t) = 0;
};

}  // namespace planted
