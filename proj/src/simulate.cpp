#include "seqdesign/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "seqdesign/errors.hpp"

namespace seqdesign {

int simulate_response(const ModelParams& true_params, double x, Rng& rng) {
    return rng.bernoulli(prob_response(true_params, x)) ? 1 : 0;
}

double observed_d(std::span<const Observation> data, const ModelParams& estimate) {
    InformationMatrix j;
    for (const auto& obs : data) {
        const double g = g_weight(estimate.a * obs.x + estimate.b);
        j.j11 += g * obs.x * obs.x;
        j.j12 += g * obs.x;
        j.j22 += g;
    }
    return d_criterion(j);
}

namespace {

void validate(const SimulationConfig& config) {
    if (config.n_reps < 1) throw std::invalid_argument("simulate: n_reps >= 1");
    if (config.init_stage < 2) throw std::invalid_argument("simulate: init_stage >= 2");
    if (config.t_horizon < 1) throw std::invalid_argument("simulate: T >= 1");
    if (config.update_cost < 0) throw std::invalid_argument("simulate: Cs >= 0");
    if (!(config.true_params.a > 0.0)) throw std::invalid_argument("simulate: true a > 0");
    if (!(config.init_guess.a > 0.0)) throw std::invalid_argument("simulate: guess a > 0");
}

void measure_batch(const SimulationConfig& config, Rng& rng, double x1, double x2, int n,
                   std::vector<Observation>& data) {
    // Alternating pairs, x1 first; an odd count puts the extra point at x1.
    for (int i = 0; i < n; ++i) {
        const double x = (i % 2 == 0) ? x1 : x2;
        data.push_back({x, simulate_response(config.true_params, x, rng)});
    }
}

const ModelParams& d_eval_params(const SimulationConfig& config, const ModelParams& est) {
    return config.observed_d_at_truth ? config.true_params : est;
}

}  // namespace

InitResult initialize(const SimulationConfig& config, Rng& rng) {
    validate(config);
    const TwoPointDesign design = optimal_covariates(config.init_guess);
    const double center = 0.5 * (design.x1 + design.x2);
    double half = design.x1 - center;

    InitResult result;
    for (int escalation = 0; escalation <= 5; ++escalation) {
        result.x1 = center + half;
        result.x2 = center - half;
        measure_batch(config, rng, result.x1, result.x2, config.init_stage, result.data);
        try {
            result.mle = fit_mle(result.data, config.init_guess);
            result.escalations = escalation;
            result.d0_observed = observed_d(result.data, d_eval_params(config, result.mle));
            return result;
        } catch (const SeparationError&) {
        } catch (const ConvergenceError&) {
        }
        half *= 2.0;  // widen and measure another batch
    }
    throw ConvergenceError("initialize: no finite fit after 5 escalations");
}

namespace {

// Shared stage driver. An update event pays Cs, refits on everything measured
// so far and moves the measurement configuration to the fit's implied optimal
// design. The transform x_i = (z_i* - b_hat)/a_hat is well defined for any
// nonzero slope (the model is symmetric under (a,b,x) -> (-a,b,-x); a negative
// fitted slope just reverses the two points), so only a genuine fit failure or
// a vanishing slope carries the previous configuration forward for the stage.
struct StageRunner {
    const SimulationConfig& config;
    Rng& rng;
    Trajectory& traj;
    std::vector<Observation>& data;
    ModelParams estimate;  // last finite fit, any slope sign
    double design_x1;
    double design_x2;
    std::int64_t clock;

    void run_stage(int n_measurements, bool update_first) {
        bool failed = false;
        if (update_first) {
            clock += config.update_cost;
            ++traj.n_updates;
            try {
                estimate = fit_mle(data, estimate);
                if (std::abs(estimate.a) > 1e-12) {
                    const auto [z1, z2] = solve_optimal_design();
                    design_x1 = (z1 - estimate.b) / estimate.a;
                    design_x2 = (z2 - estimate.b) / estimate.a;
                } else {
                    failed = true;  // slope too degenerate for the transform
                }
            } catch (const SeparationError&) {
                failed = true;
            } catch (const ConvergenceError&) {
                failed = true;
            }
        }

        StageRecord rec;
        rec.start_time = static_cast<int>(clock);
        rec.n_measurements = n_measurements;
        rec.x1 = design_x1;
        rec.x2 = design_x2;
        rec.mle_after = estimate;
        rec.refit_failed = failed;
        measure_batch(config, rng, design_x1, design_x2, n_measurements, data);
        clock += n_measurements;
        rec.observed_d = observed_d(data, d_eval_params(config, estimate));
        traj.stages.push_back(rec);
    }
};

}  // namespace

Trajectory run_policy(const SimulationConfig& config, Rng& rng, int replication_id) {
    validate(config);

    Trajectory traj;
    traj.replication_id = replication_id;

    InitResult init = initialize(config, rng);

    StageRecord init_rec;
    init_rec.start_time = 0;
    init_rec.n_measurements = static_cast<int>(init.data.size());
    init_rec.x1 = init.x1;
    init_rec.x2 = init.x2;
    init_rec.mle_after = init.mle;
    init_rec.refit_failed = false;
    init_rec.observed_d = init.d0_observed;
    traj.stages.push_back(init_rec);

    StageRunner runner{config,  rng,     traj,
                       init.data, init.mle, init.x1,
                       init.x2, static_cast<std::int64_t>(init.data.size())};

    const int cs = config.update_cost;
    const int horizon = config.t_horizon;

    if (const auto* p = std::get_if<MaxDSchedulePolicy>(&config.policy)) {
        const auto& times = p->schedule.update_times;
        if (times.empty() || times.front() != 0) {
            throw std::invalid_argument("run_policy: max-D schedule must start at time 0");
        }
        for (std::size_t j = 0; j < times.size(); ++j) {
            const int stage_end = (j + 1 < times.size()) ? times[j + 1] : horizon;
            const int len = stage_end - times[j] - cs;
            if (len < 1) throw std::invalid_argument("run_policy: schedule gap <= Cs");
            runner.run_stage(len, true);
        }
    } else if (const auto* p = std::get_if<MinTimePolicy>(&config.policy)) {
        const MinTimeTable& table = p->table;
        if (table.config.update_cost != cs) {
            throw std::invalid_argument("run_policy: min-time table solved for a different Cs");
        }
        int i = table.round_to_grid(table.config.d0);
        for (int guard = 0; guard <= table.config.n_d + 1; ++guard) {
            if (table.grid_value(i) >= table.config.d_final) break;
            const int dt = table.policy[static_cast<std::size_t>(i)];
            runner.run_stage(dt - table.config.update_cost, true);
            const double dn = table.grid_value(i) +
                              table.h_grid[static_cast<std::size_t>(i)] *
                                  static_cast<double>(dt - table.config.update_cost);
            if (dn >= table.config.d_final) break;
            int k = table.round_to_grid(dn);
            if (k <= i) k = i + 1;
            i = k;
        }
    } else if (const auto* p = std::get_if<AdhocGrowthPolicy>(&config.policy)) {
        double size = static_cast<double>(config.init_stage);
        std::int64_t elapsed = 0;
        for (;;) {
            size *= 1.0 + p->rate;
            const int batch = static_cast<int>(std::llround(size));
            size = static_cast<double>(batch);  // compound on the rounded size
            if (elapsed + cs + 1 > horizon) break;
            const int len =
                static_cast<int>(std::min<std::int64_t>(batch, horizon - elapsed - cs));
            runner.run_stage(len, true);
            elapsed += cs + len;
        }
    } else if (const auto* p = std::get_if<FixedBatchPolicy>(&config.policy)) {
        if (p->batch < 1) throw std::invalid_argument("run_policy: batch >= 1");
        std::int64_t elapsed = 0;
        bool first = true;
        for (;;) {
            const int overhead = first ? 0 : cs;
            if (elapsed + overhead + 1 > horizon) break;
            const int len =
                static_cast<int>(std::min<std::int64_t>(p->batch, horizon - elapsed - overhead));
            runner.run_stage(len, !first);
            elapsed += overhead + len;
            first = false;
        }
    }

    traj.total_time = runner.clock;
    return traj;
}

std::vector<Trajectory> run_replications(const SimulationConfig& config) {
    validate(config);
    std::vector<Trajectory> out;
    out.reserve(static_cast<std::size_t>(config.n_reps));
    for (int rep = 0; rep < config.n_reps; ++rep) {
        const std::uint64_t sub_seed = derive_seed(config.seed, static_cast<std::uint64_t>(rep));
        Rng rng(sub_seed);
        Trajectory traj = run_policy(config, rng, rep);
        traj.seed_used = sub_seed;
        out.push_back(std::move(traj));
    }
    return out;
}

double quantile(std::vector<double> values, double p) {
    if (values.empty()) throw std::invalid_argument("quantile: empty sample");
    std::sort(values.begin(), values.end());
    const double pos = p * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= values.size()) return values.back();
    const double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

std::vector<SummaryRow> aggregate(const std::vector<Trajectory>& trajectories) {
    if (trajectories.empty()) throw std::invalid_argument("aggregate: no trajectories");
    std::size_t max_stages = 0;
    for (const auto& t : trajectories) max_stages = std::max(max_stages, t.stages.size());

    std::vector<SummaryRow> rows;
    for (std::size_t k = 0; k < max_stages; ++k) {
        std::vector<double> times;
        std::vector<double> ds;
        for (const auto& t : trajectories) {
            if (k < t.stages.size()) {
                const auto& s = t.stages[k];
                times.push_back(static_cast<double>(s.start_time + s.n_measurements));
                ds.push_back(s.observed_d);
            }
        }
        SummaryRow row;
        row.cumulative_time = quantile(times, 0.5);
        row.median_d = quantile(ds, 0.5);
        row.q25_d = quantile(ds, 0.25);
        row.q75_d = quantile(ds, 0.75);
        rows.push_back(row);
    }
    return rows;
}

SimulationConfig benchmark_config() {
    SimulationConfig config;
    config.true_params = {0.24, -61.0};
    config.t_horizon = 3500;
    config.update_cost = 228;  // 0.88167 s / 0.00386 s = 228.4, rounded to integer time
    config.init_stage = 100;
    // Deliberately bad starting guess (slope two orders of magnitude high, so
    // the initial design is nearly coincident), calibrated once so the
    // observed starting criterion lands near 0.1408.
    config.init_guess = {64.0, -15626.85};
    config.n_reps = 100;
    config.seed = 20240917;
    config.policy = AdhocGrowthPolicy{0.10};
    return config;
}

double benchmark_d0() { return 0.1408; }

}  // namespace seqdesign
