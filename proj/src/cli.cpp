#include "seqdesign/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

#include "CLI11.hpp"
#include "seqdesign/acceptance.hpp"
#include "seqdesign/accumulation.hpp"
#include "seqdesign/cloglog.hpp"
#include "seqdesign/csv.hpp"
#include "seqdesign/dpp.hpp"
#include "seqdesign/errors.hpp"
#include "seqdesign/simulate.hpp"

namespace seqdesign {

namespace {

namespace fs = std::filesystem;

// Flat key=value config support: each "key=value" line becomes "--key value"
// unless that flag already appears on the command line, so explicit flags win.
// '#' starts a comment; a value of "true" turns the key into a bare flag.
std::vector<std::string> apply_config_file(const std::vector<std::string>& args) {
    std::string path;
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
        if (args[i] == "--config") path = args[i + 1];
    }
    if (path.empty()) return args;

    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config file " + path);

    auto trim = [](std::string s) {
        const auto begin = s.find_first_not_of(" \t\r");
        const auto end = s.find_last_not_of(" \t\r");
        return (begin == std::string::npos) ? std::string{} : s.substr(begin, end - begin + 1);
    };

    std::vector<std::string> expanded = args;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line is not key=value: " + line);
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("config line has empty key: " + line);
        const std::string flag = "--" + key;
        bool overridden = false;
        for (const auto& a : args) {
            if (a == flag) overridden = true;
        }
        if (overridden) continue;
        expanded.push_back(flag);
        if (value != "true") expanded.push_back(value);
    }
    return expanded;
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
    fs::create_directories(dir);
    std::ofstream out(fs::path(dir) / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file " + name + " under " + dir);
    return out;
}

void write_schedule_csv(std::ostream& out, const Schedule& sched) {
    out << "update_time,predicted_d\n";
    for (std::size_t i = 0; i < sched.update_times.size(); ++i) {
        out << csv_int(sched.update_times[i]) << ',' << csv_double(sched.predicted_d[i]) << '\n';
    }
}

void write_max_d_table_csv(std::ostream& out, const ValueTableMaxD& table) {
    out << "d,t,u,t_next\n";
    for (int i = 0; i < table.config.n_d; ++i) {
        const std::string d = csv_double(table.grid_value(i));
        for (int t = 0; t <= table.config.t_horizon; ++t) {
            out << d << ',' << t << ',' << csv_double(table.value(i, t)) << ','
                << table.next_update(i, t) << '\n';
        }
    }
}

void write_min_time_table_csv(std::ostream& out, const MinTimeTable& table) {
    out << "d,v,dt\n";
    for (int i = 0; i < table.config.n_d; ++i) {
        out << csv_double(table.grid_value(i)) << ','
            << csv_int(table.v[static_cast<std::size_t>(i)]) << ','
            << table.policy[static_cast<std::size_t>(i)] << '\n';
    }
}

void write_trajectories_csv(std::ostream& out, const std::vector<Trajectory>& trajs) {
    out << "replication,stage,start_time,n_measurements,x1,x2,a_hat,b_hat,observed_d,"
           "cumulative_time\n";
    for (const auto& traj : trajs) {
        for (std::size_t k = 0; k < traj.stages.size(); ++k) {
            const auto& s = traj.stages[k];
            out << traj.replication_id << ',' << k << ',' << s.start_time << ','
                << s.n_measurements << ',' << csv_double(s.x1) << ',' << csv_double(s.x2) << ','
                << csv_double(s.mle_after.a) << ',' << csv_double(s.mle_after.b) << ','
                << csv_double(s.observed_d) << ',' << csv_int(s.start_time + s.n_measurements)
                << '\n';
        }
    }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows,
                       const std::string& policy) {
    out << "cumulative_time,median_d,q25_d,q75_d,policy\n";
    for (const auto& r : rows) {
        out << csv_double(r.cumulative_time) << ',' << csv_double(r.median_d) << ','
            << csv_double(r.q25_d) << ',' << csv_double(r.q75_d) << ',' << policy << '\n';
    }
}

struct MaxDFlags {
    int t = 1000;
    int cs = 5;
    double d0 = 0.5;
    double d_min = 0.0;  // 0 = default to D0
    double d_max = 0.0;  // 0 = default to D0 + h_star*T
    int n_d = 2000;
    AccumulationModel model;
    std::string out;
};

MaxDConfig make_max_d_config(const MaxDFlags& f) {
    MaxDConfig c;
    c.t_horizon = f.t;
    c.update_cost = f.cs;
    c.d0 = f.d0;
    c.d_min = (f.d_min > 0.0) ? f.d_min : f.d0;
    c.d_max = (f.d_max > 0.0) ? f.d_max
                              : f.d0 + f.model.h_star * static_cast<double>(f.t);
    c.n_d = f.n_d;
    return c;
}

void add_model_options(CLI::App* cmd, AccumulationModel& model) {
    cmd->add_option("--hstar", model.h_star, "saturation gain of h(D)")
        ->capture_default_str();
    cmd->add_option("--eta", model.eta, "eta constant of h(D)")->capture_default_str();
    cmd->add_option("--theta", model.theta, "theta constant of h(D) (negative)")
        ->capture_default_str();
}

int dispatch(const std::vector<std::string>& raw_args) {
    const std::vector<std::string> args = apply_config_file(raw_args);
    std::string config_path;

    CLI::App app{"Cost-efficient batch-sequential D-optimal design for cloglog responses"};
    app.require_subcommand(1);

    // ---- design ----------------------------------------------------------
    auto* design = app.add_subcommand(
        "design", "Print the locally D-optimal two-point design for given parameters");
    double design_a = 1.0;
    double design_b = 0.0;
    design->add_option("--a", design_a, "slope estimate")->required()->check(CLI::PositiveNumber);
    design->add_option("--b", design_b, "intercept estimate")->required();
    design->add_option("--config", config_path, "flat key=value file; flags override");
    design->callback([&]() {
        const TwoPointDesign d = optimal_covariates({design_a, design_b});
        std::cout << "z1* = " << csv_double(d.z1) << "\nz2* = " << csv_double(d.z2)
                  << "\nx1 = " << csv_double(d.x1) << "\nx2 = " << csv_double(d.x2)
                  << "\nsqrt_det_J* = "
                  << csv_double(optimal_design_criterion() / design_a) << "\n";
    });

    // ---- solve-max-d -----------------------------------------------------
    auto* maxd = app.add_subcommand(
        "solve-max-d", "Solve for the update times maximizing accumulated D by time T");
    MaxDFlags mf;
    maxd->add_option("--t", mf.t, "horizon T in measurement units")->required();
    maxd->add_option("--cs", mf.cs, "update cost Cs")->required();
    maxd->add_option("--d0", mf.d0, "starting criterion D0")->required();
    maxd->add_option("--dmin", mf.d_min, "grid lower bound (default D0)");
    maxd->add_option("--dmax", mf.d_max, "grid upper bound (default D0 + h_star*T)");
    maxd->add_option("--nd", mf.n_d, "number of D grid points")->capture_default_str();
    maxd->add_option("--out", mf.out, "directory for max_d_table.csv and max_d_schedule.csv");
    add_model_options(maxd, mf.model);
    maxd->add_option("--config", config_path, "flat key=value file; flags override");
    maxd->callback([&]() {
        const MaxDConfig config = make_max_d_config(mf);
        const ValueTableMaxD table = solve_max_d(config, mf.model);
        const Schedule sched = extract_schedule_max_d(table, config.d0);
        const double u0 = table.value(table.round_to_grid(config.d0), 0);
        std::cout << "u(D0,0) = " << csv_double(u0) << "\nupdates = " << sched.update_times.size()
                  << "\nupdate_times =";
        for (int t : sched.update_times) std::cout << ' ' << t;
        std::cout << "\n";
        if (!mf.out.empty()) {
            auto table_out = open_out(mf.out, "max_d_table.csv");
            write_max_d_table_csv(table_out, table);
            auto sched_out = open_out(mf.out, "max_d_schedule.csv");
            write_schedule_csv(sched_out, sched);
        }
    });

    // ---- solve-min-time --------------------------------------------------
    auto* mint = app.add_subcommand(
        "solve-min-time", "Solve for the update times reaching D_final in minimal time");
    double mt_d0 = 0.5;
    double mt_final = 5.0;
    int mt_cs = 5;
    double mt_dmin = 0.0;
    int mt_nd = 2000;
    AccumulationModel mt_model;
    std::string mt_out;
    mint->add_option("--d0", mt_d0, "starting criterion D0")->required();
    mint->add_option("--dfinal", mt_final, "target criterion")->required();
    mint->add_option("--cs", mt_cs, "update cost Cs")->required();
    mint->add_option("--dmin", mt_dmin, "grid lower bound (default D0)");
    mint->add_option("--nd", mt_nd, "number of D grid points")->capture_default_str();
    mint->add_option("--out", mt_out,
                     "directory for min_time_table.csv and min_time_schedule.csv");
    add_model_options(mint, mt_model);
    mint->add_option("--config", config_path, "flat key=value file; flags override");
    mint->callback([&]() {
        if (mt_d0 >= mt_final) {
            // Already at or past the target; nothing to solve.
            std::cout << "total_cost = 0\nupdates = 0\nupdate_times =\n";
            if (!mt_out.empty()) {
                auto sched_out = open_out(mt_out, "min_time_schedule.csv");
                write_schedule_csv(sched_out, Schedule{});
            }
            return;
        }
        MinTimeConfig config;
        config.d0 = mt_d0;
        config.d_final = mt_final;
        config.update_cost = mt_cs;
        config.d_min = (mt_dmin > 0.0) ? mt_dmin : mt_d0;
        config.n_d = mt_nd;
        const MinTimeTable table = solve_min_time(config, mt_model);
        const Schedule sched = extract_schedule_min_time(table, config.d0);
        std::cout << "total_cost = " << csv_int(sched.total_cost.value_or(0))
                  << "\nupdates = " << sched.update_times.size() << "\nupdate_times =";
        for (int t : sched.update_times) std::cout << ' ' << t;
        std::cout << "\n";
        if (!mt_out.empty()) {
            auto table_out = open_out(mt_out, "min_time_table.csv");
            write_min_time_table_csv(table_out, table);
            auto sched_out = open_out(mt_out, "min_time_schedule.csv");
            write_schedule_csv(sched_out, sched);
        }
    });

    // ---- simulate ----------------------------------------------------------
    auto* sim = app.add_subcommand("simulate",
                                   "Monte-Carlo simulation of the switching-measurement "
                                   "experiment under a chosen update policy");
    std::string preset;
    SimulationConfig screen;  // flag values before preset resolution
    screen.true_params = {1.0, 0.0};
    screen.t_horizon = 1000;
    screen.update_cost = 5;
    screen.init_stage = 100;
    screen.init_guess = {1.0, 0.0};
    std::string policy_name = "dpp-max-d";
    double sim_rate = 0.10;
    int sim_batch = 100;
    double sim_d0 = 0.5;
    double sim_dfinal = 5.0;
    int sim_nd = 2000;
    bool sim_at_truth = false;
    std::string sim_out;
    sim->add_option("--preset", preset, "named scenario (paper-s4)")
        ->check(CLI::IsMember({"paper-s4"}));
    sim->add_option("--a", screen.true_params.a, "true slope");
    sim->add_option("--b", screen.true_params.b, "true intercept");
    sim->add_option("--t", screen.t_horizon, "policy-phase budget T")->capture_default_str();
    sim->add_option("--cs", screen.update_cost, "update cost Cs")->capture_default_str();
    sim->add_option("--init-stage", screen.init_stage, "initialization batch size")
        ->capture_default_str();
    sim->add_option("--init-a", screen.init_guess.a, "initial slope guess");
    sim->add_option("--init-b", screen.init_guess.b, "initial intercept guess");
    sim->add_option("--n-reps", screen.n_reps, "replications")->capture_default_str();
    sim->add_option("--seed", screen.seed, "base seed")->capture_default_str();
    sim->add_option("--policy", policy_name, "dpp-max-d | dpp-min-time | adhoc-growth | fixed-batch")
        ->check(CLI::IsMember({"dpp-max-d", "dpp-min-time", "adhoc-growth", "fixed-batch"}))
        ->capture_default_str();
    sim->add_option("--rate", sim_rate, "growth rate for adhoc-growth")->capture_default_str();
    sim->add_option("--batch", sim_batch, "stage size for fixed-batch")->capture_default_str();
    sim->add_option("--d0", sim_d0, "model-D fed to the DP solvers")->capture_default_str();
    sim->add_option("--dfinal", sim_dfinal, "model-D target for dpp-min-time")
        ->capture_default_str();
    sim->add_option("--nd", sim_nd, "D grid points for the DP solvers")->capture_default_str();
    sim->add_flag("--at-truth", sim_at_truth,
                  "evaluate observed D at the true parameters (sensitivity check)");
    sim->add_option("--out", sim_out, "directory for trajectories.csv and summary.csv");
    sim->add_option("--config", config_path, "flat key=value file; flags override");
    sim->callback([&]() {
        SimulationConfig config = screen;
        double d0_model = sim_d0;
        if (preset == "paper-s4") {
            // Preset values fill in whatever was not given explicitly.
            const SimulationConfig base = benchmark_config();
            if (sim->count("--a") == 0) config.true_params.a = base.true_params.a;
            if (sim->count("--b") == 0) config.true_params.b = base.true_params.b;
            if (sim->count("--t") == 0) config.t_horizon = base.t_horizon;
            if (sim->count("--cs") == 0) config.update_cost = base.update_cost;
            if (sim->count("--init-stage") == 0) config.init_stage = base.init_stage;
            if (sim->count("--init-a") == 0) config.init_guess.a = base.init_guess.a;
            if (sim->count("--init-b") == 0) config.init_guess.b = base.init_guess.b;
            if (sim->count("--n-reps") == 0) config.n_reps = base.n_reps;
            if (sim->count("--seed") == 0) config.seed = base.seed;
            if (sim->count("--d0") == 0) d0_model = benchmark_d0();
        }
        config.observed_d_at_truth = sim_at_truth;

        const AccumulationModel model;
        if (policy_name == "dpp-max-d") {
            MaxDFlags f;
            f.t = config.t_horizon;
            f.cs = config.update_cost;
            f.d0 = d0_model;
            f.n_d = sim_nd;
            f.model = model;
            const ValueTableMaxD table = solve_max_d(make_max_d_config(f), model);
            config.policy = MaxDSchedulePolicy{extract_schedule_max_d(table, d0_model)};
        } else if (policy_name == "dpp-min-time") {
            MinTimeConfig c;
            c.d0 = d0_model;
            c.d_final = sim_dfinal;
            c.update_cost = config.update_cost;
            c.d_min = d0_model;
            c.n_d = sim_nd;
            config.policy = MinTimePolicy{solve_min_time(c, model)};
        } else if (policy_name == "adhoc-growth") {
            config.policy = AdhocGrowthPolicy{sim_rate};
        } else {
            config.policy = FixedBatchPolicy{sim_batch};
        }

        const std::vector<Trajectory> trajs = run_replications(config);
        const std::vector<SummaryRow> summary = aggregate(trajs);

        std::vector<double> final_d;
        std::vector<double> total_time;
        for (const auto& t : trajs) {
            final_d.push_back(t.stages.back().observed_d);
            total_time.push_back(static_cast<double>(t.total_time));
        }
        std::cout << "replications = " << trajs.size()
                  << "\nmedian_final_observed_d = " << csv_double(quantile(final_d, 0.5))
                  << "\nmedian_total_time = " << csv_double(quantile(total_time, 0.5)) << "\n";

        if (!sim_out.empty()) {
            auto traj_out = open_out(sim_out, "trajectories.csv");
            write_trajectories_csv(traj_out, trajs);
            auto summary_out = open_out(sim_out, "summary.csv");
            write_summary_csv(summary_out, summary, policy_name);
        }
    });

    // ---- bench -------------------------------------------------------------
    auto* bench =
        app.add_subcommand("bench", "Run the full verification sweep and print pass/fail lines");
    bench->callback([&]() {
        if (!run_acceptance_sweep(std::cout)) {
            throw CLI::RuntimeError(1);
        }
    });

    std::vector<const char*> argv;
    argv.push_back("seqdesign");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
        return 0;
    } catch (const CLI::RuntimeError& e) {
        return e.get_exit_code();  // bench failure
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints help or the parse error
        return code == 0 ? 0 : 2;
    }
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    try {
        return dispatch(args);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}

int run_cli(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args);
}

}  // namespace seqdesign
