#pragma once

#include <utility>

#include "hetgoal/goal.hpp"

namespace hetgoal {

// Exact optimal ego return for a small Cooperative Reaching instance, by
// backward induction over the joint dynamics with the scripted teammate
// fixed to a known target. Independent of the ReachEnv implementation on
// purpose: this is the test oracle the env and the scripted policies are
// checked against.
//
// Throws if the joint state space exceeds ~1e6 states.
double cr_exhaustive_optimal_return(int side, const GoalMask& ego_mask,
                                    const GoalMask& tm_mask, int tm_target,
                                    std::pair<int, int> ego_start,
                                    std::pair<int, int> tm_start, int horizon);

}  // namespace hetgoal
