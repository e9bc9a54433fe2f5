#include "seqdesign/accumulation.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "seqdesign/errors.hpp"
#include "seqdesign/rng.hpp"

namespace seqdesign {

double h(const AccumulationModel& model, double d) {
    if (!(d > 0.0)) throw std::invalid_argument("h: requires D > 0");
    return model.h_star / (1.0 + std::exp(model.eta) * std::pow(d, model.theta));
}

namespace {

// Information of the optimal two-point design under (1,0), normalized so that
// sqrt(det((D/d)*J*)) == D exactly.
struct OptimalInfo {
    InformationMatrix j;
    double d;  // sqrt(det j)
};

const OptimalInfo& optimal_info() {
    static const OptimalInfo info = [] {
        const auto [z1, z2] = solve_optimal_design();
        const std::array<double, 2> xs{z1, z2};
        OptimalInfo o;
        o.j = fisher_information(ModelParams{1.0, 0.0}, xs);
        o.d = d_criterion(o.j);
        return o;
    }();
    return info;
}

// Lower Cholesky factor of the covariance (h*/D) * J*^{-1}.
struct Chol2 {
    double l11, l21, l22;
};

Chol2 covariance_cholesky(double d) {
    const auto& opt = optimal_info();
    const double scale = opt.d / d;  // multiplies J*^{-1}
    const double det = opt.j.det();
    const double c11 = scale * opt.j.j22 / det;
    const double c12 = -scale * opt.j.j12 / det;
    const double c22 = scale * opt.j.j11 / det;
    Chol2 l;
    l.l11 = std::sqrt(c11);
    l.l21 = c12 / l.l11;
    l.l22 = std::sqrt(c22 - l.l21 * l.l21);
    return l;
}

// One simulated per-double-measurement gain; draws until a_hat > 0.
double draw_gain(Rng& rng, const Chol2& l, double z1_star, double z2_star, long& rejected,
                 ModelParams* estimate_out = nullptr) {
    for (;;) {
        const double n1 = rng.normal();
        const double n2 = rng.normal();
        const double a_hat = 1.0 + l.l11 * n1;
        const double b_hat = l.l21 * n1 + l.l22 * n2;
        if (!(a_hat > 0.0)) {
            ++rejected;
            continue;
        }
        const double z1 = (z1_star - b_hat) / a_hat;
        const double z2 = (z2_star - b_hat) / a_hat;
        if (estimate_out != nullptr) *estimate_out = ModelParams{a_hat, b_hat};
        return std::sqrt(g_weight(z1) * g_weight(z2)) * (z1 - z2);
    }
}

}  // namespace

ExpectedChangeResult estimate_expected_change(double d, long n_samples, std::uint64_t seed) {
    if (!(d > 0.0)) throw std::invalid_argument("estimate_expected_change: requires D > 0");
    if (n_samples < 1) throw std::invalid_argument("estimate_expected_change: requires n >= 1");

    const auto [z1_star, z2_star] = solve_optimal_design();
    const Chol2 l = covariance_cholesky(d);

    Rng rng(seed);
    double sum = 0.0;
    double sum_sq = 0.0;
    long rejected = 0;
    for (long i = 0; i < n_samples; ++i) {
        const double gain = draw_gain(rng, l, z1_star, z2_star, rejected);
        sum += gain;
        sum_sq += gain * gain;
    }
    if (2 * rejected > rejected + n_samples) {
        throw ConvergenceError(
            "estimate_expected_change: rejection rate above 50%, D too small for the "
            "normal approximation");
    }
    const double n = static_cast<double>(n_samples);
    const double mean = sum / n;
    const double var = (n_samples > 1) ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;
    return {mean, std::sqrt(var), n_samples, rejected};
}

double min_time_closed_form(const AccumulationModel& model, double d, double d_final) {
    if (!(d > 0.0) || d > d_final) {
        throw std::invalid_argument("min_time_closed_form: requires 0 < D <= D_final");
    }
    const double p = model.theta + 1.0;
    return ((d_final - d) + std::exp(model.eta) * (std::pow(d_final, p) - std::pow(d, p)) / p) /
           model.h_star;
}

double max_d_continuous(const AccumulationModel& model, double d, double t, double t_final) {
    if (!(d > 0.0) || t < 0.0 || t > t_final) {
        throw std::invalid_argument("max_d_continuous: requires D > 0 and 0 <= t <= T");
    }
    const double span = t_final - t;
    if (span == 0.0) return 0.0;

    auto rk4 = [&](long steps) {
        const double dt = span / static_cast<double>(steps);
        double y = d;
        for (long i = 0; i < steps; ++i) {
            const double k1 = h(model, y);
            const double k2 = h(model, y + 0.5 * dt * k1);
            const double k3 = h(model, y + 0.5 * dt * k2);
            const double k4 = h(model, y + dt * k3);
            y += dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        }
        return y;
    };

    long steps = 256;
    double prev = rk4(steps);
    for (int halvings = 0; halvings < 16; ++halvings) {
        steps *= 2;
        const double cur = rk4(steps);
        if (std::abs(cur - prev) <= 1e-8 * std::max(1.0, std::abs(cur))) {
            return cur - d;
        }
        prev = cur;
    }
    throw ConvergenceError("max_d_continuous: RK4 step halving did not settle");
}

std::vector<double> accumulation_convergence_check(int n_max, double d_start, int n_reps,
                                                   std::uint64_t seed) {
    if (n_max < 2) throw std::invalid_argument("accumulation_convergence_check: n_max >= 2");
    if (n_reps < 1) throw std::invalid_argument("accumulation_convergence_check: n_reps >= 1");
    if (!(d_start > 0.0)) {
        throw std::invalid_argument("accumulation_convergence_check: d_start > 0");
    }

    const auto [z1_star, z2_star] = solve_optimal_design();
    const double h_star = optimal_design_criterion();
    const ModelParams truth{1.0, 0.0};

    std::vector<double> mean_abs(static_cast<std::size_t>(n_max - 1), 0.0);
    for (int rep = 0; rep < n_reps; ++rep) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(rep)));
        InformationMatrix total;
        double prev_d = 0.0;
        for (int n = 1; n <= n_max; ++n) {
            const double d_n = d_start + static_cast<double>(n) * h_star;
            const Chol2 l = covariance_cholesky(d_n);
            long rejected = 0;
            ModelParams est;
            draw_gain(rng, l, z1_star, z2_star, rejected, &est);
            const std::array<double, 2> xs{(z1_star - est.b) / est.a,
                                           (z2_star - est.b) / est.a};
            const InformationMatrix j_n = fisher_information(truth, xs);
            total += j_n;
            const double cur_d = d_criterion(total);
            if (n >= 2) {
                const double gap = std::abs(cur_d - prev_d - d_criterion(j_n));
                mean_abs[static_cast<std::size_t>(n - 2)] += gap;
            }
            prev_d = cur_d;
        }
    }
    for (double& v : mean_abs) v /= static_cast<double>(n_reps);
    return mean_abs;
}

}  // namespace seqdesign
