#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "seqdesign/cloglog.hpp"
#include "seqdesign/dpp.hpp"
#include "seqdesign/rng.hpp"

namespace seqdesign {

// ---------------------------------------------------------------------------
// Policies choosing when to pay the update cost and refit
// ---------------------------------------------------------------------------

// Follow a precomputed max-D update schedule over horizon T, starting with an
// update at policy time 0.
struct MaxDSchedulePolicy {
    Schedule schedule;
};

// Follow the stored min-time stage lengths, keyed by the model-D walked on
// the solver's grid; runs until the model-D target is reached.
struct MinTimePolicy {
    MinTimeTable table;
};

// Grow the stage size by a fixed rate each stage (the original ad hoc method),
// paying the update cost before every post-initialization stage.
struct AdhocGrowthPolicy {
    double rate = 0.10;
};

// Constant stage size. The first post-initialization batch keeps measuring at
// the initialization design (no update cost); updates happen between batches.
struct FixedBatchPolicy {
    int batch = 0;
};

using PolicySpec =
    std::variant<MaxDSchedulePolicy, MinTimePolicy, AdhocGrowthPolicy, FixedBatchPolicy>;

// ---------------------------------------------------------------------------
// Configuration and records
// ---------------------------------------------------------------------------

struct SimulationConfig {
    ModelParams true_params;
    int t_horizon = 0;    // policy-phase budget T (measurement units)
    int update_cost = 0;  // Cs
    int init_stage = 100;
    ModelParams init_guess;
    int n_reps = 1;
    std::uint64_t seed = 0;
    PolicySpec policy;
    // Sensitivity switch: evaluate observed D at the true parameters instead
    // of the current MLE.
    bool observed_d_at_truth = false;
};

struct StageRecord {
    int start_time = 0;      // trajectory clock at the first measurement
    int n_measurements = 0;
    double x1 = 0.0;
    double x2 = 0.0;
    ModelParams mle_after;   // estimate in effect for this stage
    bool refit_failed = false;  // previous estimate carried forward
    double observed_d = 0.0;
};

struct Trajectory {
    std::vector<StageRecord> stages;
    std::int64_t total_time = 0;  // measurements plus Cs per update
    int n_updates = 0;
    int replication_id = 0;
    std::uint64_t seed_used = 0;
};

struct InitResult {
    std::vector<Observation> data;
    double d0_observed = 0.0;
    ModelParams mle;
    int escalations = 0;
    double x1 = 0.0;  // design points of the last batch
    double x2 = 0.0;
};

// Per-stage-index aggregate over replications.
struct SummaryRow {
    double cumulative_time = 0.0;  // median across trajectories
    double median_d = 0.0;
    double q25_d = 0.0;
    double q75_d = 0.0;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// One Bernoulli response with success probability prob_response(params, x).
int simulate_response(const ModelParams& true_params, double x, Rng& rng);

/// sqrt(det J) of the data actually measured, evaluated at an estimate.
double observed_d(std::span<const Observation> data, const ModelParams& estimate);

/// Initial batch at the guess's optimal design, alternating the two points.
/// When the fit fails the covariate spread is doubled around the design
/// center and another batch is measured, at most five times.
InitResult initialize(const SimulationConfig& config, Rng& rng);

/// Simulate one full trajectory under the configured policy.
Trajectory run_policy(const SimulationConfig& config, Rng& rng, int replication_id = 0);

/// All replications with per-replication derived sub-seeds.
std::vector<Trajectory> run_replications(const SimulationConfig& config);

/// Per-stage medians and interquartile band of observed D versus time.
std::vector<SummaryRow> aggregate(const std::vector<Trajectory>& trajectories);

/// Interpolating sample quantile (R type 7) of an unsorted copy.
double quantile(std::vector<double> values, double p);

/// The switching-measurement benchmark scenario: (a,b) = (0.24, -61),
/// T = 3500, Cs = 228, 100-measurement initialization with a deliberately
/// bad guess calibrated so the observed starting criterion is near 0.1408.
SimulationConfig benchmark_config();

/// Model-D starting point the benchmark feeds to the DP solvers.
double benchmark_d0();

}  // namespace seqdesign
