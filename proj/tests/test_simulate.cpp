#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>
#include <vector>

#include "seqdesign/accumulation.hpp"
#include "seqdesign/errors.hpp"
#include "seqdesign/simulate.hpp"

using namespace seqdesign;

namespace {

SimulationConfig base_config() {
    SimulationConfig config;
    config.true_params = {1.0, 0.0};
    config.t_horizon = 500;
    config.update_cost = 5;
    config.init_stage = 100;
    config.init_guess = {1.0, 0.0};
    config.n_reps = 1;
    config.seed = 31337;
    config.policy = FixedBatchPolicy{50};
    return config;
}

}  // namespace

TEST_CASE("simulate_response saturates and matches the response probability") {
    Rng rng(1);
    const ModelParams params{1.0, 0.0};
    for (int i = 0; i < 50; ++i) {
        CHECK(simulate_response(params, 40.0, rng) == 1);
        CHECK(simulate_response(params, -40.0, rng) == 0);
    }

    long hits = 0;
    const long n = 100000;
    for (long i = 0; i < n; ++i) hits += simulate_response(params, 0.0, rng);
    const double mean = static_cast<double>(hits) / static_cast<double>(n);
    CHECK(std::abs(mean - 0.63212055882855768) < 0.005);
}

TEST_CASE("observed_d basics") {
    const ModelParams est{1.0, 0.0};
    CHECK(observed_d(std::vector<Observation>{}, est) == 0.0);

    const std::vector<Observation> repeated{{0.5, 1}, {0.5, 0}, {0.5, 1}};
    CHECK(observed_d(repeated, est) == doctest::Approx(0.0).epsilon(1e-10));

    const auto [z1, z2] = solve_optimal_design();
    const std::vector<Observation> optimal{{z1, 1}, {z2, 0}};
    CHECK(observed_d(optimal, est) == doctest::Approx(0.80940268).epsilon(1e-7));
}

TEST_CASE("initialize with the true parameters concentrates near the model prediction") {
    SimulationConfig config = base_config();
    Rng rng(derive_seed(config.seed, 0));
    const InitResult init = initialize(config, rng);
    CHECK(init.escalations == 0);
    CHECK(init.data.size() == 100);

    // All 100 measurements sit at the exact optimal design (the guess is the
    // truth and initialization never refits), so each double measurement
    // contributes h_star: the prediction is 50 h_star.
    const AccumulationModel model;
    CHECK(init.d0_observed == doctest::Approx(50.0 * model.h_star).epsilon(0.30));
}

TEST_CASE("a bad guess lowers the observed starting criterion") {
    SimulationConfig good = base_config();
    SimulationConfig bad = base_config();
    bad.init_guess = benchmark_config().init_guess;
    bad.true_params = benchmark_config().true_params;

    Rng rng_good(derive_seed(7, 0));
    Rng rng_bad(derive_seed(7, 0));
    const InitResult g = initialize(good, rng_good);
    const InitResult b = initialize(bad, rng_bad);
    CHECK(b.d0_observed < g.d0_observed);
}

TEST_CASE("an all-failure first batch escalates the spread") {
    SimulationConfig config = base_config();
    config.init_guess = {1.0, 12.0};  // design lands deep in the zero-response region
    Rng rng(derive_seed(3, 0));
    const InitResult init = initialize(config, rng);
    CHECK(init.escalations >= 1);
    CHECK(init.data.size() == 100u * (init.escalations + 1));
    CHECK(init.x1 - init.x2 > 0.0);
}

TEST_CASE("initialization fails after five escalations in a dead region") {
    SimulationConfig config = base_config();
    config.init_guess = {1.0, 60.0};  // even five doublings stay at p ~ 0
    Rng rng(derive_seed(4, 0));
    CHECK_THROWS_AS(initialize(config, rng), ConvergenceError);
}

TEST_CASE("fixed-batch covering the whole budget runs one stage, no updates") {
    SimulationConfig config = base_config();
    config.policy = FixedBatchPolicy{config.t_horizon};
    Rng rng(derive_seed(config.seed, 0));
    const Trajectory traj = run_policy(config, rng);
    REQUIRE(traj.stages.size() == 2);  // initialization plus one batch
    CHECK(traj.n_updates == 0);
    CHECK(traj.stages[1].n_measurements == config.t_horizon);
    CHECK(traj.total_time == 100 + config.t_horizon);
}

TEST_CASE("time accounting matches measurements plus update costs") {
    SimulationConfig config = base_config();
    config.policy = AdhocGrowthPolicy{0.10};
    config.n_reps = 5;
    const auto trajs = run_replications(config);
    for (const auto& traj : trajs) {
        std::int64_t meas = 0;
        for (const auto& s : traj.stages) meas += s.n_measurements;
        CHECK(traj.total_time ==
              meas + static_cast<std::int64_t>(config.update_cost) * traj.n_updates);
        CHECK(traj.total_time <= 100 + config.t_horizon);
    }
}

TEST_CASE("adhoc growth produces 10% larger stages until truncation") {
    SimulationConfig config = base_config();
    config.t_horizon = 800;
    config.policy = AdhocGrowthPolicy{0.10};
    Rng rng(derive_seed(11, 0));
    const Trajectory traj = run_policy(config, rng);
    REQUIRE(traj.stages.size() >= 4);
    CHECK(traj.stages[1].n_measurements == 110);
    CHECK(traj.stages[2].n_measurements == 121);
    CHECK(traj.stages[3].n_measurements == 133);
}

TEST_CASE("observed D accumulates along a trajectory") {
    SimulationConfig config = base_config();
    config.policy = FixedBatchPolicy{50};
    config.n_reps = 8;
    config.seed = 61;
    const auto trajs = run_replications(config);
    for (const auto& traj : trajs) {
        // At any fixed estimate the information is additive in the data, so
        // D over growing prefixes is exactly nondecreasing.
        const ModelParams final_est = traj.stages.back().mle_after;
        Rng replay(traj.seed_used);
        std::vector<Observation> data;
        double prev = 0.0;
        for (const auto& stage : traj.stages) {
            for (int i = 0; i < stage.n_measurements; ++i) {
                const double x = (i % 2 == 0) ? stage.x1 : stage.x2;
                data.push_back({x, simulate_response(config.true_params, x, replay)});
            }
            const double cur = observed_d(data, final_est);
            CHECK(cur >= prev);
            prev = cur;
        }
        // The recorded sequence is evaluated at the refitted estimate of each
        // stage; refits can dent it slightly, never more than a few percent
        // once the estimate has settled.
        for (std::size_t k = 0; k + 1 < traj.stages.size(); ++k) {
            CHECK(traj.stages[k].observed_d <= traj.stages[k + 1].observed_d * 1.05);
        }
    }
}

TEST_CASE("replications are bit-identical for identical config and seed") {
    SimulationConfig config = base_config();
    config.policy = AdhocGrowthPolicy{0.10};
    config.n_reps = 3;
    const auto first = run_replications(config);
    const auto second = run_replications(config);
    REQUIRE(first.size() == second.size());
    for (std::size_t r = 0; r < first.size(); ++r) {
        REQUIRE(first[r].stages.size() == second[r].stages.size());
        CHECK(first[r].total_time == second[r].total_time);
        CHECK(first[r].seed_used == second[r].seed_used);
        for (std::size_t k = 0; k < first[r].stages.size(); ++k) {
            CHECK(first[r].stages[k].observed_d == second[r].stages[k].observed_d);
            CHECK(first[r].stages[k].x1 == second[r].stages[k].x1);
            CHECK(first[r].stages[k].mle_after.a == second[r].stages[k].mle_after.a);
        }
    }
}

TEST_CASE("free updates make observed-D increments track h along the path") {
    SimulationConfig config = base_config();
    config.t_horizon = 2000;
    config.update_cost = 0;
    config.policy = FixedBatchPolicy{2};
    Rng rng(derive_seed(17, 0));
    const Trajectory traj = run_policy(config, rng);
    REQUIRE(traj.stages.size() > 100);

    const AccumulationModel model;
    double mean_increment = 0.0;
    double mean_h = 0.0;
    long count = 0;
    for (std::size_t k = 1; k + 1 < traj.stages.size(); ++k) {
        const double before = traj.stages[k].observed_d;
        const double after = traj.stages[k + 1].observed_d;
        mean_increment += after - before;
        mean_h += h(model, before);
        ++count;
    }
    mean_increment /= static_cast<double>(count);
    mean_h /= static_cast<double>(count);
    CHECK(mean_increment == doctest::Approx(mean_h).epsilon(0.20));
}

TEST_CASE("a max-D schedule is followed stage by stage") {
    const AccumulationModel model;
    SimulationConfig config = base_config();
    config.t_horizon = 400;
    config.update_cost = 9;

    MaxDConfig dp;
    dp.t_horizon = config.t_horizon;
    dp.update_cost = config.update_cost;
    dp.d0 = 0.5;
    dp.d_min = 0.5;
    dp.d_max = 0.5 + model.h_star * static_cast<double>(config.t_horizon);
    dp.n_d = 800;
    const auto table = solve_max_d(dp, model);
    const Schedule schedule = extract_schedule_max_d(table, dp.d0);
    config.policy = MaxDSchedulePolicy{schedule};

    Rng rng(derive_seed(23, 0));
    const Trajectory traj = run_policy(config, rng);
    REQUIRE(traj.stages.size() == schedule.update_times.size() + 1);
    CHECK(traj.n_updates == static_cast<int>(schedule.update_times.size()));

    // Stage k+1 starts at init length + schedule time + Cs.
    for (std::size_t j = 0; j < schedule.update_times.size(); ++j) {
        CHECK(traj.stages[j + 1].start_time ==
              100 + schedule.update_times[j] + config.update_cost);
    }
    // The policy phase spends exactly T.
    CHECK(traj.total_time == 100 + config.t_horizon);
}

TEST_CASE("a min-time policy stops when the model D reaches the target") {
    const AccumulationModel model;
    SimulationConfig config = base_config();
    config.update_cost = 8;

    MinTimeConfig mt;
    mt.d0 = 0.5;
    mt.d_final = 3.0;
    mt.update_cost = config.update_cost;
    mt.d_min = 0.5;
    mt.n_d = 900;
    const auto table = solve_min_time(mt, model);
    const Schedule schedule = extract_schedule_min_time(table, mt.d0);
    config.policy = MinTimePolicy{table};

    Rng rng(derive_seed(29, 0));
    const Trajectory traj = run_policy(config, rng);
    REQUIRE(traj.stages.size() == schedule.update_times.size() + 1);
    // The policy phase spends exactly the solved minimal time.
    CHECK(traj.total_time == 100 + *schedule.total_cost);
}

TEST_CASE("aggregate of a single trajectory echoes the trajectory") {
    SimulationConfig config = base_config();
    config.policy = AdhocGrowthPolicy{0.10};
    const auto trajs = run_replications(config);
    REQUIRE(trajs.size() == 1);
    const auto rows = aggregate(trajs);
    REQUIRE(rows.size() == trajs[0].stages.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& s = trajs[0].stages[k];
        CHECK(rows[k].median_d == s.observed_d);
        CHECK(rows[k].q25_d == s.observed_d);
        CHECK(rows[k].q75_d == s.observed_d);
        CHECK(rows[k].cumulative_time == static_cast<double>(s.start_time + s.n_measurements));
    }

    // Duplicating the list leaves the medians unchanged.
    auto doubled = trajs;
    doubled.push_back(trajs[0]);
    const auto rows2 = aggregate(doubled);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        CHECK(rows2[k].median_d == rows[k].median_d);
    }
}

TEST_CASE("quantile interpolates like a type-7 sample quantile") {
    const std::vector<double> values{4.0, 1.0, 3.0, 2.0};
    CHECK(quantile(values, 0.5) == 2.5);
    CHECK(quantile(values, 0.0) == 1.0);
    CHECK(quantile(values, 1.0) == 4.0);
    CHECK(quantile(values, 0.25) == 1.75);
    CHECK_THROWS_AS(quantile({}, 0.5), std::invalid_argument);
}

TEST_CASE("observed D can be evaluated at the truth for sensitivity checks") {
    SimulationConfig config = base_config();
    config.observed_d_at_truth = true;
    Rng rng(derive_seed(41, 0));
    const InitResult init = initialize(config, rng);
    // At the true parameters the two-point information is deterministic.
    std::vector<double> xs;
    for (const auto& obs : init.data) xs.push_back(obs.x);
    CHECK(init.d0_observed ==
          doctest::Approx(d_criterion(fisher_information(config.true_params, xs)))
              .epsilon(1e-12));
}

TEST_CASE("configuration validation") {
    SimulationConfig config = base_config();
    config.n_reps = 0;
    CHECK_THROWS_AS(run_replications(config), std::invalid_argument);
    config = base_config();
    config.init_stage = 1;
    Rng rng(1);
    CHECK_THROWS_AS(run_policy(config, rng), std::invalid_argument);
}
