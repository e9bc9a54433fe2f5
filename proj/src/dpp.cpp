#include "seqdesign/dpp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "seqdesign/errors.hpp"

namespace seqdesign {

namespace {

// All state rounding goes through these two helpers so the solvers and the
// brute-force oracles are bit-identical.
inline int round_index(double d, double d_min, double inv_step, int n_d) {
    int k = static_cast<int>((d - d_min) * inv_step + 0.5);
    if (k < 0) k = 0;
    if (k > n_d - 1) k = n_d - 1;
    return k;
}

inline double advance(double d, double h_d, int len) {
    return d + h_d * static_cast<double>(len);
}

void validate_max_d(const MaxDConfig& c, const AccumulationModel& model) {
    if (!model.valid()) throw std::invalid_argument("max-d: invalid accumulation model");
    if (c.t_horizon < 1 || c.update_cost < 0 || c.update_cost >= c.t_horizon) {
        throw std::invalid_argument("max-d: requires 0 <= Cs < T");
    }
    if (!(c.d_min > 0.0) || !(c.d_min < c.d_max) || c.n_d < 2) {
        throw std::invalid_argument("max-d: requires 0 < d_min < d_max and n_d >= 2");
    }
    if (c.d0 < c.d_min || c.d0 > c.d_max) {
        throw std::invalid_argument("max-d: requires d_min <= D0 <= d_max");
    }
    const double reach = c.d0 + model.h_star * static_cast<double>(c.t_horizon);
    if (c.d_max < reach * (1.0 - 1e-12)) {
        throw GridError("max-d: grid too small, needs d_max >= D0 + h_star*T");
    }
}

void validate_min_time(const MinTimeConfig& c, const AccumulationModel& model) {
    if (!model.valid()) throw std::invalid_argument("min-time: invalid accumulation model");
    if (c.update_cost < 0) throw std::invalid_argument("min-time: requires Cs >= 0");
    if (!(c.d_min > 0.0) || c.n_d < 2) {
        throw std::invalid_argument("min-time: requires d_min > 0 and n_d >= 2");
    }
    if (c.d0 < c.d_min || !(c.d0 < c.d_final)) {
        throw std::invalid_argument("min-time: requires d_min <= D0 < D_final");
    }
}

// Stage length cap of the min-time program: one more stage of this length
// reaches the target, and overshooting further is never cheaper.
inline int stage_cap(double d, double d_final, double h_d, int cs) {
    return cs + static_cast<int>(std::ceil((d_final - d) / h_d));
}

}  // namespace

// ---------------------------------------------------------------------------
// Max-D solver
// ---------------------------------------------------------------------------

double ValueTableMaxD::grid_step() const {
    return (config.d_max - config.d_min) / static_cast<double>(config.n_d - 1);
}

double ValueTableMaxD::grid_value(int i) const {
    return config.d_min + grid_step() * static_cast<double>(i);
}

int ValueTableMaxD::round_to_grid(double d) const {
    return round_index(d, config.d_min, 1.0 / grid_step(), config.n_d);
}

ValueTableMaxD solve_max_d(const MaxDConfig& config, const AccumulationModel& model) {
    validate_max_d(config, model);

    const int t_n = config.t_horizon + 1;
    const int n_d = config.n_d;
    const int cs = config.update_cost;
    const int horizon = config.t_horizon;
    const double step = (config.d_max - config.d_min) / static_cast<double>(n_d - 1);
    const double inv_step = 1.0 / step;

    ValueTableMaxD table;
    table.config = config;
    table.model = model;
    table.u.assign(static_cast<std::size_t>(n_d) * t_n, 0.0);
    table.policy.assign(static_cast<std::size_t>(n_d) * t_n, -1);
    table.h_grid.resize(static_cast<std::size_t>(n_d));
    for (int i = 0; i < n_d; ++i) {
        table.h_grid[i] = h(model, config.d_min + step * static_cast<double>(i));
    }

    double* u = table.u.data();
    std::int32_t* policy = table.policy.data();

    // Terminal band t in [T-Cs, T] is the zero initialization above. Fill
    // backwards; within one time step the D rows are independent.
    for (int t = horizon - cs - 1; t >= 0; --t) {
        const int l_max = horizon - t - cs;
        for (int i = 0; i < n_d; ++i) {
            const double d = config.d_min + step * static_cast<double>(i);
            const double h_d = table.h_grid[i];
            double best = -std::numeric_limits<double>::infinity();
            int best_next = -1;
            const int s0 = t + cs;
            for (int len = 1; len <= l_max; ++len) {
                const int k =
                    round_index(advance(d, h_d, len), config.d_min, inv_step, n_d);
                const double val =
                    h_d * static_cast<double>(len) + u[static_cast<std::size_t>(k) * t_n + s0 + len];
                if (val > best) {
                    best = val;
                    best_next = s0 + len;
                }
            }
            u[static_cast<std::size_t>(i) * t_n + t] = best;
            policy[static_cast<std::size_t>(i) * t_n + t] = best_next;
        }
    }
    return table;
}

Schedule extract_schedule_max_d(const ValueTableMaxD& table, double d0) {
    const auto& c = table.config;
    if (d0 < c.d_min || d0 > c.d_max) {
        throw std::invalid_argument("extract_schedule_max_d: D0 outside grid");
    }
    const int t_n = c.t_horizon + 1;

    Schedule sched;
    int i = table.round_to_grid(d0);
    int t = 0;
    sched.update_times.push_back(0);
    sched.predicted_d.push_back(table.grid_value(i));
    for (;;) {
        const std::int32_t t_next = table.policy[static_cast<std::size_t>(i) * t_n + t];
        if (t_next < 0) break;  // started inside the terminal band
        const int len = t_next - t - c.update_cost;
        const int k = table.round_to_grid(advance(table.grid_value(i), table.h_grid[i], len));
        if (table.policy[static_cast<std::size_t>(k) * t_n + t_next] < 0) {
            break;  // the stage runs out the clock; t_next is not an update
        }
        sched.update_times.push_back(t_next);
        sched.predicted_d.push_back(table.grid_value(k));
        i = k;
        t = t_next;
    }
    return sched;
}

// ---------------------------------------------------------------------------
// Min-time solver
// ---------------------------------------------------------------------------

double MinTimeTable::grid_step() const {
    return (d_max - config.d_min) / static_cast<double>(config.n_d - 1);
}

double MinTimeTable::grid_value(int i) const {
    return config.d_min + grid_step() * static_cast<double>(i);
}

int MinTimeTable::round_to_grid(double d) const {
    return round_index(d, config.d_min, 1.0 / grid_step(), config.n_d);
}

MinTimeTable solve_min_time(const MinTimeConfig& config, const AccumulationModel& model) {
    validate_min_time(config, model);

    const int n_d = config.n_d;
    const int cs = config.update_cost;

    MinTimeTable table;
    table.config = config;
    table.model = model;
    table.d_max = config.d_final + model.h_star;
    const double step = (table.d_max - config.d_min) / static_cast<double>(n_d - 1);
    const double inv_step = 1.0 / step;
    table.v.assign(static_cast<std::size_t>(n_d), 0);
    table.policy.assign(static_cast<std::size_t>(n_d), 0);
    table.h_grid.resize(static_cast<std::size_t>(n_d));
    for (int i = 0; i < n_d; ++i) {
        table.h_grid[i] = h(model, config.d_min + step * static_cast<double>(i));
    }

    // Dependencies point to strictly higher grid indices, so one descending
    // sweep suffices.
    for (int i = n_d - 1; i >= 0; --i) {
        const double d = config.d_min + step * static_cast<double>(i);
        if (d >= config.d_final) continue;  // v = 0 past the target

        const double h_d = table.h_grid[i];
        const int dt_cap = stage_cap(d, config.d_final, h_d, cs);
        std::int64_t best = std::numeric_limits<std::int64_t>::max();
        int best_dt = 0;
        for (int dt = cs + 1; dt <= dt_cap; ++dt) {
            const double dn = advance(d, h_d, dt - cs);
            std::int64_t cand;
            if (dn >= config.d_final) {
                cand = dt;  // this stage finishes
            } else {
                int k = round_index(dn, config.d_min, inv_step, n_d);
                if (k <= i) k = i + 1;  // never allow a non-advancing state
                cand = dt + table.v[static_cast<std::size_t>(k)];
            }
            if (cand < best) {
                best = cand;
                best_dt = dt;
            }
        }
        table.v[static_cast<std::size_t>(i)] = best;
        table.policy[static_cast<std::size_t>(i)] = best_dt;
    }
    return table;
}

Schedule extract_schedule_min_time(const MinTimeTable& table, double d0) {
    const auto& c = table.config;
    Schedule sched;
    sched.total_cost = 0;
    if (d0 >= c.d_final) return sched;  // already past the target
    if (d0 < c.d_min) {
        throw std::invalid_argument("extract_schedule_min_time: D0 below grid");
    }

    int i = table.round_to_grid(d0);
    if (table.grid_value(i) >= c.d_final) return sched;

    std::int64_t total = 0;
    int elapsed = 0;
    sched.update_times.push_back(0);
    sched.predicted_d.push_back(table.grid_value(i));
    for (int guard = 0;; ++guard) {
        if (guard > c.n_d + 1) {
            throw std::logic_error("extract_schedule_min_time: walk failed to terminate");
        }
        const int dt = table.policy[static_cast<std::size_t>(i)];
        const double dn = advance(table.grid_value(i), table.h_grid[i], dt - c.update_cost);
        total += dt;
        if (dn >= c.d_final) break;
        int k = table.round_to_grid(dn);
        if (k <= i) k = i + 1;
        if (table.grid_value(k) >= c.d_final) break;  // rounded past the target
        elapsed += dt;
        sched.update_times.push_back(elapsed);
        sched.predicted_d.push_back(table.grid_value(k));
        i = k;
    }
    sched.total_cost = total;
    return sched;
}

// ---------------------------------------------------------------------------
// Brute-force oracles
// ---------------------------------------------------------------------------

double brute_force_max_d_chain_count(const MaxDConfig& config) {
    const int horizon = config.t_horizon;
    const int cs = config.update_cost;
    // count[t] = number of admissible chains from an update at time t;
    // count[t] = sum of count[s] over s in (t+Cs, T], terminal band counts 1.
    std::vector<double> count(static_cast<std::size_t>(horizon) + 1, 1.0);
    double suffix = 1.0;  // sum of count[s] for s in (t+Cs, T], seeded at t = T-Cs-1
    for (int t = horizon - cs - 1; t >= 0; --t) {
        count[static_cast<std::size_t>(t)] = suffix;
        // stepping to t-1 adds s = t + Cs to the range
        suffix += count[static_cast<std::size_t>(t + cs)];
    }
    return count[0];
}

namespace {

struct MaxDSearch {
    const MaxDConfig* config;
    const std::vector<double>* h_grid;
    double inv_step;
    long nodes = 0;
    long cap = 0;

    double grid_value(int i) const {
        return config->d_min +
               (config->d_max - config->d_min) / static_cast<double>(config->n_d - 1) *
                   static_cast<double>(i);
    }

    // Returns the best value from an update at (grid i, time t) and fills
    // chain with the maximizing update times after t (terminal hop included).
    double run(int i, int t, std::vector<int>& chain) {
        if (++nodes > cap) {
            throw EnumerationError("brute_force_max_d: node cap exceeded");
        }
        const int cs = config->update_cost;
        const int horizon = config->t_horizon;
        if (t >= horizon - cs) {
            chain.clear();
            return 0.0;
        }
        const double d = grid_value(i);
        const double h_d = (*h_grid)[static_cast<std::size_t>(i)];
        double best = -std::numeric_limits<double>::infinity();
        std::vector<int> best_chain;
        std::vector<int> sub;
        for (int len = 1; len <= horizon - t - cs; ++len) {
            const int k = round_index(advance(d, h_d, len), config->d_min, inv_step, config->n_d);
            const double val = h_d * static_cast<double>(len) + run(k, t + cs + len, sub);
            if (val > best) {
                best = val;
                best_chain.clear();
                best_chain.push_back(t + cs + len);
                best_chain.insert(best_chain.end(), sub.begin(), sub.end());
            }
        }
        chain = std::move(best_chain);
        return best;
    }
};

}  // namespace

BruteForceResult brute_force_max_d(const MaxDConfig& config, const AccumulationModel& model,
                                   long node_cap) {
    validate_max_d(config, model);
    if (brute_force_max_d_chain_count(config) > static_cast<double>(node_cap)) {
        throw EnumerationError("brute_force_max_d: search space above the cap");
    }

    const int n_d = config.n_d;
    const double step = (config.d_max - config.d_min) / static_cast<double>(n_d - 1);
    std::vector<double> h_grid(static_cast<std::size_t>(n_d));
    for (int i = 0; i < n_d; ++i) {
        h_grid[static_cast<std::size_t>(i)] = h(model, config.d_min + step * i);
    }

    MaxDSearch search{&config, &h_grid, 1.0 / step, 0, node_cap * 4};
    std::vector<int> chain;
    const int i0 = round_index(config.d0, config.d_min, search.inv_step, n_d);
    BruteForceResult result;
    result.value = search.run(i0, 0, chain);

    // Rebuild the visited grid states; drop the final terminal-band hop.
    result.schedule.update_times.push_back(0);
    result.schedule.predicted_d.push_back(search.grid_value(i0));
    int i = i0;
    int t = 0;
    for (int t_next : chain) {
        if (t_next >= config.t_horizon - config.update_cost) break;
        const int len = t_next - t - config.update_cost;
        i = round_index(advance(search.grid_value(i), h_grid[static_cast<std::size_t>(i)], len),
                        config.d_min, search.inv_step, n_d);
        result.schedule.update_times.push_back(t_next);
        result.schedule.predicted_d.push_back(search.grid_value(i));
        t = t_next;
    }
    return result;
}

double brute_force_min_time_chain_count(const MinTimeConfig& config,
                                        const AccumulationModel& model) {
    validate_min_time(config, model);
    const int n_d = config.n_d;
    const int cs = config.update_cost;
    const double d_max = config.d_final + model.h_star;
    const double step = (d_max - config.d_min) / static_cast<double>(n_d - 1);
    const double inv_step = 1.0 / step;

    // Cells at or past the target terminate a chain, so they count one.
    std::vector<double> count(static_cast<std::size_t>(n_d), 1.0);
    for (int i = n_d - 1; i >= 0; --i) {
        const double d = config.d_min + step * static_cast<double>(i);
        if (d >= config.d_final) continue;
        const double h_d = h(model, d);
        double c = 0.0;
        const int dt_cap = stage_cap(d, config.d_final, h_d, cs);
        for (int dt = cs + 1; dt <= dt_cap; ++dt) {
            const double dn = advance(d, h_d, dt - cs);
            if (dn >= config.d_final) {
                c += 1.0;
            } else {
                int k = round_index(dn, config.d_min, inv_step, n_d);
                if (k <= i) k = i + 1;
                c += count[static_cast<std::size_t>(k)];
            }
        }
        count[static_cast<std::size_t>(i)] = c;
    }
    const int i0 = round_index(config.d0, config.d_min, inv_step, n_d);
    return count[static_cast<std::size_t>(i0)];
}

namespace {

struct MinTimeSearch {
    const MinTimeConfig* config;
    const std::vector<double>* h_grid;
    double d_max;
    double inv_step;
    long nodes = 0;
    long cap = 0;

    double grid_value(int i) const {
        return config->d_min + (d_max - config->d_min) / static_cast<double>(config->n_d - 1) *
                                   static_cast<double>(i);
    }

    std::int64_t run(int i, std::vector<int>& chain) {
        if (++nodes > cap) {
            throw EnumerationError("brute_force_min_time: node cap exceeded");
        }
        const int cs = config->update_cost;
        const double d = grid_value(i);
        if (d >= config->d_final) {  // promoted or rounded past the target
            chain.clear();
            return 0;
        }
        const double h_d = (*h_grid)[static_cast<std::size_t>(i)];
        std::int64_t best = std::numeric_limits<std::int64_t>::max();
        std::vector<int> best_chain;
        std::vector<int> sub;
        const int dt_cap = stage_cap(d, config->d_final, h_d, cs);
        for (int dt = cs + 1; dt <= dt_cap; ++dt) {
            const double dn = advance(d, h_d, dt - cs);
            std::int64_t val;
            if (dn >= config->d_final) {
                sub.clear();
                val = dt;
            } else {
                int k = round_index(dn, config->d_min, inv_step, config->n_d);
                if (k <= i) k = i + 1;
                val = dt + run(k, sub);
            }
            if (val < best) {
                best = val;
                best_chain.clear();
                best_chain.push_back(dt);
                best_chain.insert(best_chain.end(), sub.begin(), sub.end());
            }
        }
        chain = std::move(best_chain);
        return best;
    }
};

}  // namespace

BruteForceResult brute_force_min_time(const MinTimeConfig& config, const AccumulationModel& model,
                                      long node_cap) {
    validate_min_time(config, model);
    if (brute_force_min_time_chain_count(config, model) > static_cast<double>(node_cap)) {
        throw EnumerationError("brute_force_min_time: search space above the cap");
    }

    const int n_d = config.n_d;
    const double d_max = config.d_final + model.h_star;
    const double step = (d_max - config.d_min) / static_cast<double>(n_d - 1);
    std::vector<double> h_grid(static_cast<std::size_t>(n_d));
    for (int i = 0; i < n_d; ++i) {
        h_grid[static_cast<std::size_t>(i)] = h(model, config.d_min + step * i);
    }

    MinTimeSearch search{&config, &h_grid, d_max, 1.0 / step, 0, node_cap * 4};
    BruteForceResult result;
    if (config.d0 >= config.d_final) {
        result.schedule.total_cost = 0;
        return result;
    }
    const int i0 = round_index(config.d0, config.d_min, search.inv_step, n_d);
    if (search.grid_value(i0) >= config.d_final) {
        result.schedule.total_cost = 0;
        return result;
    }

    std::vector<int> chain;
    result.total_cost = search.run(i0, chain);
    result.schedule.total_cost = result.total_cost;

    int i = i0;
    int elapsed = 0;
    result.schedule.update_times.push_back(0);
    result.schedule.predicted_d.push_back(search.grid_value(i0));
    for (std::size_t s = 0; s + 1 < chain.size(); ++s) {
        const int dt = chain[s];
        const double dn =
            advance(search.grid_value(i), h_grid[static_cast<std::size_t>(i)], dt - config.update_cost);
        int k = round_index(dn, config.d_min, search.inv_step, n_d);
        if (k <= i) k = i + 1;
        elapsed += dt;
        result.schedule.update_times.push_back(elapsed);
        result.schedule.predicted_d.push_back(search.grid_value(k));
        i = k;
    }
    return result;
}

}  // namespace seqdesign
