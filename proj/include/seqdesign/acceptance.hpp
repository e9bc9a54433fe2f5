#pragma once

#include <ostream>

namespace seqdesign {

// Runs the full verification sweep (optimal-design reproduction, h constants,
// DP-vs-brute-force equality, bounds, continuum consistency, schedule shape,
// the switching-measurement benchmark, accumulation convergence and the
// randomized property suite), printing one pass/fail line per criterion.
// Returns true when every criterion passes.
bool run_acceptance_sweep(std::ostream& out);

}  // namespace seqdesign
