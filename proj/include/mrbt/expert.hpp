#pragma once

#include "mrbt/trace.hpp"

namespace mrbt {

// Deterministic scripted solvers used to produce demonstrations.
//  Optimal   - shortest subgoal routes.
//  ScanFirst - peeks left and right before setting off, then solves.
//  DropKey   - solves the task but abandons the key once its door is open.
enum class ExpertStyle { Optimal, ScanFirst, DropKey };

// Runs the expert from one initial condition. Throws if the expert fails
// to finish the task within the space's step budget.
Trace run_expert(const SpaceBundle& bundle, const EnvState& s0, const Task& task,
                 ExpertStyle style);

std::vector<Trace> collect_expert_demos(const SpaceBundle& bundle, ExpertStyle style, int n,
                                        std::uint64_t seed);

// Uniform random action walks of the given length (no task achievement
// guarantee; used as negative examples).
std::vector<Trace> collect_random_demos(const SpaceBundle& bundle, int n, int length,
                                        std::uint64_t seed);

}  // namespace mrbt
