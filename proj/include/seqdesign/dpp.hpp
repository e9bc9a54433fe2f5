#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "seqdesign/accumulation.hpp"

namespace seqdesign {

// ---------------------------------------------------------------------------
// Maximize accumulated D by a fixed horizon T (backward induction in t).
// ---------------------------------------------------------------------------

// Time is in measurement units; one covariate update costs Cs of them.
// The D grid is uniform on [d_min, d_max] with n_d points and must be able to
// hold anything reachable from D0, i.e. d_max >= D0 + h_star*T.
struct MaxDConfig {
    int t_horizon = 0;   // T
    int update_cost = 0; // Cs, 0 allowed (continuum checks solve with Cs = 0)
    double d_min = 0.0;
    double d_max = 0.0;
    int n_d = 0;
    double d0 = 0.0;
};

// Value table of the max-D program:
//   u(D, t) = best additional criterion accumulable from (D, t) updating at t,
//   policy(D, t) = maximizing next update time (none in the terminal band
//   t in [T-Cs, T], stored as -1).
// Layout is D-major: index i*(T+1) + t.
struct ValueTableMaxD {
    MaxDConfig config;
    AccumulationModel model;
    std::vector<double> u;
    std::vector<std::int32_t> policy;
    std::vector<double> h_grid;  // h at each grid point

    double grid_step() const;
    double grid_value(int i) const;
    int round_to_grid(double d) const;  // nearest grid index, half-up, clamped

    double value(int i, int t) const {
        return u[static_cast<std::size_t>(i) * (config.t_horizon + 1) + t];
    }
    std::int32_t next_update(int i, int t) const {
        return policy[static_cast<std::size_t>(i) * (config.t_horizon + 1) + t];
    }
};

// ---------------------------------------------------------------------------
// Minimize the time to reach D_final (sweep in descending D).
// ---------------------------------------------------------------------------

struct MinTimeConfig {
    double d_final = 0.0;
    int update_cost = 0;  // Cs
    double d_min = 0.0;
    int n_d = 0;
    double d0 = 0.0;
};

// v(D) = minimal remaining time (updates included) to push the criterion to
// D_final when updating immediately; policy(D) = minimizing stage length.
// Grid points at or above D_final have v = 0. Values are exact integers.
struct MinTimeTable {
    MinTimeConfig config;
    AccumulationModel model;
    double d_max = 0.0;  // internal grid top, D_final + h_star
    std::vector<std::int64_t> v;
    std::vector<std::int32_t> policy;  // stage length dt; 0 past the target
    std::vector<double> h_grid;

    double grid_step() const;
    double grid_value(int i) const;
    int round_to_grid(double d) const;
};

// An explicit update plan. update_times starts at 0 (the DP assumes an update
// at the starting instant); consecutive gaps strictly exceed Cs. predicted_d
// holds the model-D at each update. total_cost is set for min-time schedules.
struct Schedule {
    std::vector<int> update_times;
    std::vector<double> predicted_d;
    std::optional<std::int64_t> total_cost;
};

/// Backward induction for the max-D program. Throws GridError when the grid
/// cannot hold D0 + h_star*T.
ValueTableMaxD solve_max_d(const MaxDConfig& config, const AccumulationModel& model);

/// Follow the stored policy from (D0, 0) and return the update plan.
Schedule extract_schedule_max_d(const ValueTableMaxD& table, double d0);

/// Descending-D sweep for the min-time program.
MinTimeTable solve_min_time(const MinTimeConfig& config, const AccumulationModel& model);

/// Follow the stored stage lengths from D0 until the target is reached.
Schedule extract_schedule_min_time(const MinTimeTable& table, double d0);

struct BruteForceResult {
    double value = 0.0;           // max-D: accumulated criterion
    std::int64_t total_cost = 0;  // min-time: total time
    Schedule schedule;
};

/// Exhaustive search over all admissible update-time chains, sharing the
/// solver's grid rounding, evaluation order and tie-breaking, so results are
/// bit-identical to the DP. Throws EnumerationError above node_cap chains.
BruteForceResult brute_force_max_d(const MaxDConfig& config, const AccumulationModel& model,
                                   long node_cap = 20'000'000);

/// Exhaustive analogue for the min-time program.
BruteForceResult brute_force_min_time(const MinTimeConfig& config,
                                      const AccumulationModel& model,
                                      long node_cap = 20'000'000);

/// Number of admissible chains the max-D brute force would enumerate.
double brute_force_max_d_chain_count(const MaxDConfig& config);

/// Number of admissible chains the min-time brute force would enumerate.
double brute_force_min_time_chain_count(const MinTimeConfig& config,
                                        const AccumulationModel& model);

}  // namespace seqdesign
