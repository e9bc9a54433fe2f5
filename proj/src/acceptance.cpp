#include "seqdesign/acceptance.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "seqdesign/accumulation.hpp"
#include "seqdesign/cloglog.hpp"
#include "seqdesign/dpp.hpp"
#include "seqdesign/rng.hpp"
#include "seqdesign/simulate.hpp"

namespace seqdesign {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Reporter {
    std::ostream& out;
    bool all_pass = true;

    void report(int index, const std::string& name, bool pass, const std::string& detail) {
        out << (pass ? "[PASS] " : "[FAIL] ") << index << ". " << name;
        if (!detail.empty()) out << ": " << detail;
        out << '\n';
        out.flush();
        all_pass = all_pass && pass;
    }
};

std::string fmt(double v, int prec = 6) {
    std::ostringstream os;
    os << std::setprecision(prec) << v;
    return os.str();
}

// P(Binomial(n, 1/2) >= k), exact.
double sign_test_p(int n, int k) {
    double p = 0.0;
    for (int j = k; j <= n; ++j) {
        p += std::exp(std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0) -
                      n * std::log(2.0));
    }
    return p;
}

int uniform_int(Rng& rng, int lo, int hi) {
    return lo + static_cast<int>(rng.uniform01() * static_cast<double>(hi - lo + 1)) % (hi - lo + 1);
}

double uniform_range(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * rng.uniform01();
}

// --------------------------------------------------------------------------
// Criterion 1: optimal design reproduction
// --------------------------------------------------------------------------
void criterion_design(Reporter& rep) {
    const auto start = Clock::now();
    const auto [z1, z2] = solve_optimal_design();
    const double crit = optimal_design_criterion();
    const double elapsed = seconds_since(start);
    const bool pass = std::abs(z1 - 0.97963269129) < 1e-6 &&
                      std::abs(z2 - (-1.337736677)) < 1e-6 &&
                      std::abs(crit - 0.80940268) < 1e-7 && elapsed < 1.0;
    rep.report(1, "optimal design reproduction", pass,
               "z* = (" + fmt(z1, 12) + ", " + fmt(z2, 12) + "), sqrt(det J*) = " + fmt(crit, 10) +
                   ", " + fmt(elapsed, 3) + " s");
}

// --------------------------------------------------------------------------
// Criterion 2: h(D) constants
// --------------------------------------------------------------------------
void criterion_h(Reporter& rep) {
    const AccumulationModel model;
    const double at_inf = h(model, 1e12);
    const double at_one = h(model, 1.0);
    const double direct = 0.80940268 / (1.0 + std::exp(1.88938));
    const bool pass = std::abs(at_inf - 0.80940268) < 1e-6 && std::abs(at_one - direct) < 1e-10;
    rep.report(2, "h(D) parameters honored", pass,
               "h(1e12) = " + fmt(at_inf, 10) + ", h(1) = " + fmt(at_one, 12) + " vs direct " +
                   fmt(direct, 12));
}

// --------------------------------------------------------------------------
// Criterion 3: DP equals brute force on random small instances
// --------------------------------------------------------------------------
void criterion_oracle(Reporter& rep) {
    const auto start = Clock::now();
    const AccumulationModel model;
    Rng rng(1234);
    int failures = 0;
    std::string first_failure;

    for (int trial = 0; trial < 50; ++trial) {
        const int cs = uniform_int(rng, 1, 3);
        const std::array<int, 4> t_hi{0, 26, 32, 40};
        MaxDConfig config;
        config.update_cost = cs;
        config.t_horizon = uniform_int(rng, 2 * cs + 2, t_hi[static_cast<std::size_t>(cs)]);
        config.n_d = uniform_int(rng, 5, 50);
        config.d0 = uniform_range(rng, 0.1, 2.0);
        config.d_min = config.d0 * uniform_range(rng, 0.3, 1.0);
        config.d_max =
            config.d0 + model.h_star * config.t_horizon * uniform_range(rng, 1.0, 1.3);
        const auto table = solve_max_d(config, model);
        const auto brute = brute_force_max_d(config, model);
        const double u0 = table.value(table.round_to_grid(config.d0), 0);
        const auto sched = extract_schedule_max_d(table, config.d0);
        if (u0 != brute.value || sched.update_times != brute.schedule.update_times) {
            ++failures;
            if (first_failure.empty()) {
                first_failure = "max-d trial " + std::to_string(trial) + ": dp " + fmt(u0, 17) +
                                " vs brute " + fmt(brute.value, 17);
            }
        }
    }

    for (int trial = 0; trial < 50; ++trial) {
        MinTimeConfig config;
        config.update_cost = uniform_int(rng, 1, 3);
        config.d0 = uniform_range(rng, 0.3, 2.0);
        config.d_final = config.d0 * uniform_range(rng, 1.5, 4.0);
        config.d_min = config.d0 * uniform_range(rng, 0.3, 1.0);
        config.n_d = uniform_int(rng, 5, 50);
        if (brute_force_min_time_chain_count(config, model) > 2e5) {
            --trial;  // resample; the count check itself is cheap
            continue;
        }
        const auto table = solve_min_time(config, model);
        const auto brute = brute_force_min_time(config, model);
        const auto sched = extract_schedule_min_time(table, config.d0);
        const std::int64_t v0 = table.v[static_cast<std::size_t>(table.round_to_grid(config.d0))];
        if (v0 != brute.total_cost || sched.update_times != brute.schedule.update_times) {
            ++failures;
            if (first_failure.empty()) {
                first_failure = "min-time trial " + std::to_string(trial) + ": dp " +
                                std::to_string(v0) + " vs brute " +
                                std::to_string(brute.total_cost);
            }
        }
    }

    const double elapsed = seconds_since(start);
    const bool pass = failures == 0 && elapsed < 30.0;
    rep.report(3, "DP-oracle equality on 100 random instances", pass,
               (failures == 0 ? "all exact" : first_failure) + ", " + fmt(elapsed, 3) + " s");
}

// --------------------------------------------------------------------------
// Criterion 4: sandwich bound and boundedness
// --------------------------------------------------------------------------
void criterion_bounds(Reporter& rep) {
    const AccumulationModel model;
    bool pass = true;
    std::string detail;

    for (const int cs : {5, 30}) {
        MaxDConfig config;
        config.t_horizon = 1000;
        config.update_cost = cs;
        config.d0 = 0.5;
        config.d_min = 0.5;
        config.d_max = 0.5 + model.h_star * 1000.0;
        config.n_d = 2000;
        const auto with_cost = solve_max_d(config, model);
        MaxDConfig free_config = config;
        free_config.update_cost = 0;
        const auto no_cost = solve_max_d(free_config, model);

        const double cell = with_cost.grid_step();
        const double cap = model.h_star * static_cast<double>(config.t_horizon - cs);
        double worst_lower = 0.0;
        double worst_upper = 0.0;
        double max_u = 0.0;
        for (int i = 0; i < config.n_d; ++i) {
            const double h_d = with_cost.h_grid[static_cast<std::size_t>(i)];
            for (int t = 0; t <= config.t_horizon; ++t) {
                const double u = with_cost.value(i, t);
                max_u = std::max(max_u, u);
                const double lower = h_d * static_cast<double>(config.t_horizon - t - cs);
                worst_lower = std::max(worst_lower, lower - u);
                if (t + cs <= config.t_horizon) {
                    const double upper = no_cost.value(i, t + cs);
                    worst_upper = std::max(worst_upper, u - upper);
                }
            }
        }
        const bool ok = worst_lower <= 1e-9 && worst_upper <= cell + 1e-9 && max_u <= cap;
        pass = pass && ok;
        detail += "Cs=" + std::to_string(cs) + " lower slack " + fmt(worst_lower, 3) +
                  ", upper slack " + fmt(worst_upper, 3) + " (cell " + fmt(cell, 3) +
                  "), max u " + fmt(max_u, 6) + " <= " + fmt(cap, 6) + "; ";
    }
    rep.report(4, "Appendix-B sandwich and boundedness", pass, detail);
}

// --------------------------------------------------------------------------
// Criterion 5: continuum consistency at Cs = 0
// --------------------------------------------------------------------------
void criterion_continuum(Reporter& rep) {
    const auto start = Clock::now();
    const AccumulationModel model;

    MaxDConfig config;
    config.t_horizon = 1000;
    config.update_cost = 0;
    config.d0 = 0.5;
    config.d_min = 0.5;
    config.d_max = 0.5 + model.h_star * 1000.0;
    config.n_d = 4000;
    const auto table = solve_max_d(config, model);
    const double u0 = table.value(table.round_to_grid(0.5), 0);
    const double ode = max_d_continuous(model, 0.5, 0.0, 1000.0);
    const double u_rel = std::abs(u0 - ode) / ode;

    MinTimeConfig mtc;
    mtc.d_final = 5.0;
    mtc.update_cost = 0;
    mtc.d_min = 0.5;
    mtc.n_d = 4000;
    mtc.d0 = 0.5;
    const auto vt = solve_min_time(mtc, model);
    const double v0 =
        static_cast<double>(vt.v[static_cast<std::size_t>(vt.round_to_grid(0.5))]);
    const double closed = min_time_closed_form(model, 0.5, 5.0);
    const double v_rel = std::abs(v0 - closed) / closed;

    const double elapsed = seconds_since(start);
    const bool pass = u_rel < 0.01 && v_rel < 0.01 && elapsed < 120.0;
    std::string detail = "u(0.5,0) = " + fmt(u0) + " vs ODE " + fmt(ode) + " (" +
                         fmt(100.0 * u_rel, 3) + "%), v(0.5) = " + fmt(v0) + " vs closed form " +
                         fmt(closed) + " (" + fmt(100.0 * v_rel, 3) + "%), " + fmt(elapsed, 3) +
                         " s";
    if (v_rel >= 0.01) {
        detail +=
            " -- note: stage lengths are integers, so v is an integer; 23 is the exact optimum "
            "of the integer-time problem (any grid), and no integer lies within 1% of 21.316";
    }
    rep.report(5, "continuum consistency at Cs=0", pass, detail);
}

// --------------------------------------------------------------------------
// Criterion 6: qualitative schedule shape
// --------------------------------------------------------------------------
void criterion_schedules(Reporter& rep) {
    const AccumulationModel model;
    auto updates = [&](int cs, double d0) {
        MaxDConfig config;
        config.t_horizon = 1000;
        config.update_cost = cs;
        config.d0 = d0;
        config.d_min = d0;
        config.d_max = d0 + model.h_star * 1000.0;
        config.n_d = 2000;
        const auto table = solve_max_d(config, model);
        return extract_schedule_max_d(table, d0).update_times.size();
    };
    const std::size_t cheap = updates(5, 0.5);
    const std::size_t costly = updates(30, 0.5);
    const std::size_t low_d0 = updates(10, 0.5);
    const std::size_t high_d0 = updates(10, 5.0);
    const bool pass = costly < cheap && high_d0 <= low_d0;
    rep.report(6, "schedule shape versus Cs and D0", pass,
               "updates: Cs=5 -> " + std::to_string(cheap) + ", Cs=30 -> " +
                   std::to_string(costly) + "; D0=0.5 -> " + std::to_string(low_d0) +
                   ", D0=5 -> " + std::to_string(high_d0));
}

// --------------------------------------------------------------------------
// Criterion 7: the switching-measurement benchmark
// --------------------------------------------------------------------------
void criterion_benchmark(Reporter& rep) {
    const auto start = Clock::now();
    const AccumulationModel model;

    SimulationConfig config = benchmark_config();
    const double d0 = benchmark_d0();

    MaxDConfig dp;
    dp.t_horizon = config.t_horizon;
    dp.update_cost = config.update_cost;
    dp.d0 = d0;
    dp.d_min = d0;
    dp.d_max = d0 + model.h_star * static_cast<double>(config.t_horizon);
    dp.n_d = 2000;
    const auto table = solve_max_d(dp, model);
    const Schedule schedule = extract_schedule_max_d(table, d0);

    SimulationConfig dpp_config = config;
    dpp_config.policy = MaxDSchedulePolicy{schedule};
    SimulationConfig adhoc_config = config;
    adhoc_config.policy = AdhocGrowthPolicy{0.10};

    const auto dpp = run_replications(dpp_config);
    const auto adhoc = run_replications(adhoc_config);

    std::vector<double> d0_samples;
    for (const auto& t : dpp) d0_samples.push_back(t.stages.front().observed_d);
    const double d0_median = quantile(d0_samples, 0.5);

    int wins = 0;
    int ties = 0;
    std::vector<double> dpp_final;
    std::vector<double> adhoc_final;
    for (std::size_t r = 0; r < dpp.size(); ++r) {
        const double a = dpp[r].stages.back().observed_d;
        const double b = adhoc[r].stages.back().observed_d;
        dpp_final.push_back(a);
        adhoc_final.push_back(b);
        if (a > b) ++wins;
        if (a == b) ++ties;
    }
    const int n_pairs = static_cast<int>(dpp.size()) - ties;
    const double p = sign_test_p(n_pairs, wins);
    const double dpp_median = quantile(dpp_final, 0.5);
    const double adhoc_median = quantile(adhoc_final, 0.5);

    const double elapsed = seconds_since(start);
    const bool pass = std::abs(d0_median - 0.1408) <= 0.03 && dpp_median > adhoc_median &&
                      p < 0.05 && elapsed < 600.0;
    rep.report(7, "switching-measurement benchmark dominance", pass,
               "median D0 " + fmt(d0_median, 4) + " (target 0.1408 +- 0.03), median final D: dpp " +
                   fmt(dpp_median, 6) + " vs adhoc " + fmt(adhoc_median, 6) + ", wins " +
                   std::to_string(wins) + "/" + std::to_string(n_pairs) + ", sign test p = " +
                   fmt(p, 3) + ", " + fmt(elapsed, 1) + " s");
}

// --------------------------------------------------------------------------
// Criterion 8: accumulation discrepancy shrinks
// --------------------------------------------------------------------------
void criterion_accumulation(Reporter& rep) {
    const auto start = Clock::now();
    const auto seq = accumulation_convergence_check(200, 0.5, 100, 777);
    double head = 0.0;
    double tail = 0.0;
    for (int n = 2; n <= 21; ++n) head += seq[static_cast<std::size_t>(n - 2)];
    for (int n = 181; n <= 200; ++n) tail += seq[static_cast<std::size_t>(n - 2)];
    head /= 20.0;
    tail /= 20.0;
    const double elapsed = seconds_since(start);
    const bool pass = tail < head && elapsed < 120.0;
    rep.report(8, "accumulation-property convergence", pass,
               "mean |gap| rounds 2-21 = " + fmt(head, 5) + ", rounds 181-200 = " + fmt(tail, 5) +
                   ", " + fmt(elapsed, 2) + " s");
}

// --------------------------------------------------------------------------
// Criterion 9: randomized property sweep
// --------------------------------------------------------------------------
void criterion_properties(Reporter& rep) {
    Rng rng(4242);
    const AccumulationModel model;
    int failures = 0;
    std::string first;
    auto fail = [&](const std::string& what) {
        ++failures;
        if (first.empty()) first = what;
    };

    // Pairwise determinant identity, 200 random designs of size <= 20.
    for (int trial = 0; trial < 200; ++trial) {
        const ModelParams params{uniform_range(rng, 0.2, 3.0), uniform_range(rng, -2.0, 2.0)};
        const int n = uniform_int(rng, 0, 20);
        std::vector<double> xs;
        for (int i = 0; i < n; ++i) xs.push_back(uniform_range(rng, -3.0, 3.0));
        const double det = fisher_information(params, xs).det();
        double pairwise = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            for (std::size_t j = i + 1; j < xs.size(); ++j) {
                const double gi = g_weight(params.a * xs[i] + params.b);
                const double gj = g_weight(params.a * xs[j] + params.b);
                pairwise += gi * gj * (xs[i] - xs[j]) * (xs[i] - xs[j]);
            }
        }
        if (std::abs(det - pairwise) > 1e-10 * std::max(1.0, std::abs(pairwise))) {
            fail("det identity, trial " + std::to_string(trial));
        }
    }

    // Monotonicity of the response in x and b (sampled away from the exact
    // 0/1 saturation region); h increasing and bounded.
    for (int trial = 0; trial < 200; ++trial) {
        const ModelParams params{uniform_range(rng, 0.2, 3.0), uniform_range(rng, -3.0, 3.0)};
        const double z = uniform_range(rng, -25.0, 2.0);
        const double x = (z - params.b) / params.a;
        const double dx = uniform_range(rng, 1e-3, 0.5) / params.a * 0.5;
        if (!(prob_response(params, x + dx) > prob_response(params, x))) {
            fail("prob_response not increasing in x");
        }
        const ModelParams shifted{params.a, params.b + params.a * dx};
        if (!(prob_response(shifted, x) > prob_response(params, x))) {
            fail("prob_response not increasing in b");
        }
        const double d1 = std::exp(uniform_range(rng, -4.0, 13.0));
        const double d2 = d1 * uniform_range(rng, 1.0001, 3.0);
        const double h1 = h(model, d1);
        const double h2 = h(model, d2);
        if (!(h1 < h2 && h1 > 0.0 && h2 < model.h_star)) fail("h monotonicity/range");
    }

    // Scale equivariance of the optimal-design criterion.
    for (int trial = 0; trial < 200; ++trial) {
        const double a = uniform_range(rng, 0.05, 10.0);
        const double b = uniform_range(rng, -20.0, 20.0);
        const TwoPointDesign d = optimal_covariates({a, b});
        const std::array<double, 2> xs{d.x1, d.x2};
        const double det = fisher_information({a, b}, xs).det();
        const double reference = optimal_design_criterion() * optimal_design_criterion() / (a * a);
        if (std::abs(det - reference) > 1e-10 * reference) fail("scale equivariance");
    }

    // Closed-form time: decreasing in D, additive over splits.
    for (int trial = 0; trial < 200; ++trial) {
        const double d = std::exp(uniform_range(rng, -2.0, 2.0));
        const double mid = d * uniform_range(rng, 1.1, 2.0);
        const double fin = mid * uniform_range(rng, 1.1, 2.0);
        const double whole = min_time_closed_form(model, d, fin);
        const double split =
            min_time_closed_form(model, d, mid) + min_time_closed_form(model, mid, fin);
        if (std::abs(whole - split) > 1e-9 * whole) fail("closed-form additivity");
        if (!(min_time_closed_form(model, mid, fin) < whole)) fail("closed-form monotonicity");
    }

    // DP table monotonicity on a small instance, plus v's monotonicity in Cs.
    {
        MaxDConfig config;
        config.t_horizon = 200;
        config.update_cost = 7;
        config.d0 = 0.5;
        config.d_min = 0.25;
        config.d_max = 0.5 + model.h_star * 200.0;
        config.n_d = 300;
        const auto table = solve_max_d(config, model);
        for (int i = 0; i < config.n_d && failures == 0; ++i) {
            for (int t = 0; t < config.t_horizon; ++t) {
                if (table.value(i, t) < table.value(i, t + 1) - 1e-12) {
                    fail("u increasing in t");
                    break;
                }
                if (i > 0 && table.value(i, t) < table.value(i - 1, t) - 1e-12) {
                    fail("u decreasing in D");
                    break;
                }
            }
        }
        MinTimeConfig mtc;
        mtc.d_final = 4.0;
        mtc.update_cost = 3;
        mtc.d_min = 0.4;
        mtc.n_d = 300;
        mtc.d0 = 0.5;
        const auto low = solve_min_time(mtc, model);
        mtc.update_cost = 9;
        const auto high = solve_min_time(mtc, model);
        for (int i = 0; i + 1 < mtc.n_d; ++i) {
            if (low.v[static_cast<std::size_t>(i)] < low.v[static_cast<std::size_t>(i + 1)]) {
                fail("v increasing in D");
                break;
            }
        }
        const int i0 = low.round_to_grid(0.5);
        if (high.v[static_cast<std::size_t>(i0)] < low.v[static_cast<std::size_t>(i0)]) {
            fail("v not monotone in Cs");
        }
    }

    // Simulation determinism and time accounting on a small configuration.
    {
        SimulationConfig config;
        config.true_params = {1.0, 0.0};
        config.t_horizon = 400;
        config.update_cost = 9;
        config.init_stage = 60;
        config.init_guess = {1.2, 0.3};
        config.n_reps = 10;
        config.seed = 99;
        config.policy = AdhocGrowthPolicy{0.10};
        const auto first_run = run_replications(config);
        const auto second_run = run_replications(config);
        for (std::size_t r = 0; r < first_run.size(); ++r) {
            if (first_run[r].total_time != second_run[r].total_time ||
                first_run[r].stages.size() != second_run[r].stages.size()) {
                fail("replication determinism");
                break;
            }
            std::int64_t meas = 0;
            for (std::size_t k = 0; k < first_run[r].stages.size(); ++k) {
                const auto& s = first_run[r].stages[k];
                meas += s.n_measurements;
                if (s.observed_d != second_run[r].stages[k].observed_d) {
                    fail("stage determinism");
                    break;
                }
            }
            if (meas + static_cast<std::int64_t>(config.update_cost) * first_run[r].n_updates !=
                first_run[r].total_time) {
                fail("time accounting");
                break;
            }
        }
    }

    rep.report(9, "randomized property suite", failures == 0,
               failures == 0 ? "all properties hold (>= 200 cases each)" : first);
}

}  // namespace

bool run_acceptance_sweep(std::ostream& out) {
    Reporter rep{out};
    criterion_design(rep);
    criterion_h(rep);
    criterion_oracle(rep);
    criterion_bounds(rep);
    criterion_continuum(rep);
    criterion_schedules(rep);
    criterion_benchmark(rep);
    criterion_accumulation(rep);
    criterion_properties(rep);
    out << (rep.all_pass ? "ALL CRITERIA PASSED\n" : "CRITERIA FAILED\n");
    return rep.all_pass;
}

}  // namespace seqdesign
