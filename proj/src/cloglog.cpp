#include "seqdesign/cloglog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace seqdesign {

namespace {

constexpr double kZClamp = 40.0;  // double-exponential guard

// log(1 - e^{-t}) for t > 0 without cancellation (switch at t = log 2).
double log1mexp(double t) {
    if (t <= 0.0) return -std::numeric_limits<double>::infinity();
    if (t > 0.6931471805599453) return std::log1p(-std::exp(-t));
    return std::log(-std::expm1(-t));
}

// q(t) = t / (e^t - 1), the y=1 score weight in z; q(0+) = 1, q(inf) = 0.
double q_weight(double t) {
    if (t > 700.0) return 0.0;
    return t / std::expm1(t);
}

}  // namespace

double prob_response(const ModelParams& params, double x) {
    const double z = std::clamp(params.a * x + params.b, -kZClamp, kZClamp);
    return -std::expm1(-std::exp(z));
}

double log_likelihood(const ModelParams& params, std::span<const Observation> data) {
    double ll = 0.0;
    for (const auto& obs : data) {
        const double z = params.a * obs.x + params.b;
        const double t = std::exp(z);
        if (obs.y == 1) {
            ll += log1mexp(t);
        } else {
            ll -= t;
        }
    }
    return ll;
}

double g_weight(double z) {
    z = std::clamp(z, -kZClamp, kZClamp);
    const double t = std::exp(z);
    if (t > 700.0) return std::exp(2.0 * z - t);  // denominator would overflow
    return std::exp(2.0 * z) / std::expm1(t);
}

InformationMatrix fisher_information(const ModelParams& params, std::span<const double> xs) {
    InformationMatrix j;
    for (double x : xs) {
        const double g = g_weight(params.a * x + params.b);
        j.j11 += g * x * x;
        j.j12 += g * x;
        j.j22 += g;
    }
    return j;
}

double d_criterion(const InformationMatrix& j) {
    const double det = j.det();
    if (det < -1e-8 * (j.j11 * j.j22)) {
        throw std::invalid_argument("d_criterion: matrix is not positive semidefinite");
    }
    return std::sqrt(std::max(det, 0.0));
}

namespace {

// d/dz log g(z) = 2 - t/(1 - e^{-t}) with t = e^z.
double dlog_g(double z) {
    const double t = std::exp(z);
    return 2.0 - t / (-std::expm1(-t));
}

// Derivative of the above (needed for the Newton system).
double ddlog_g(double z) {
    const double t = std::exp(z);
    const double em = -std::expm1(-t);  // 1 - e^{-t}
    return -t * (em - t * std::exp(-t)) / (em * em);
}

struct DesignOptimum {
    double z1;
    double z2;
    double d;  // sqrt(g(z1)g(z2))*(z1-z2)
};

// Stationarity system of log[g(z1)g(z2)(z1-z2)^2] on the z1 > z2 branch,
// solved by Newton from a coarse grid of starts over [-4, 3]^2.
DesignOptimum compute_optimal_design() {
    auto objective = [](double z1, double z2) {
        return g_weight(z1) * g_weight(z2) * (z1 - z2) * (z1 - z2);
    };

    double best_obj = -1.0;
    double best_z1 = 0.0;
    double best_z2 = 0.0;
    bool converged_once = false;

    for (double s1 = -4.0; s1 <= 3.0 + 1e-9; s1 += 1.0) {
        for (double s2 = -4.0; s2 < s1 - 0.5; s2 += 1.0) {
            double z1 = s1;
            double z2 = s2;
            bool ok = false;
            for (int it = 0; it < 60; ++it) {
                const double gap = z1 - z2;
                if (gap < 1e-8) break;
                const double f1 = dlog_g(z1) + 2.0 / gap;
                const double f2 = dlog_g(z2) - 2.0 / gap;
                const double inv2 = 2.0 / (gap * gap);
                const double a11 = ddlog_g(z1) - inv2;
                const double a12 = inv2;
                const double a22 = ddlog_g(z2) - inv2;
                const double det = a11 * a22 - a12 * a12;
                if (std::abs(det) < 1e-14) break;
                const double d1 = (f1 * a22 - f2 * a12) / det;
                const double d2 = (f2 * a11 - f1 * a12) / det;
                z1 -= d1;
                z2 -= d2;
                if (std::abs(f1) < 1e-13 && std::abs(f2) < 1e-13) {
                    ok = true;
                    break;
                }
            }
            if (!ok || !(z1 > z2)) continue;
            converged_once = true;
            const double obj = objective(z1, z2);
            if (obj > best_obj) {
                best_obj = obj;
                best_z1 = z1;
                best_z2 = z2;
            }
        }
    }
    if (!converged_once) {
        throw ConvergenceError("solve_optimal_design: no Newton start converged");
    }
    return {best_z1, best_z2, std::sqrt(best_obj)};
}

const DesignOptimum& optimal_design() {
    static const DesignOptimum opt = compute_optimal_design();
    return opt;
}

}  // namespace

std::pair<double, double> solve_optimal_design() {
    const auto& opt = optimal_design();
    return {opt.z1, opt.z2};
}

double optimal_design_criterion() { return optimal_design().d; }

TwoPointDesign optimal_covariates(const ModelParams& estimate) {
    if (!(estimate.a > 0.0)) {
        throw std::invalid_argument("optimal_covariates: estimate must have a > 0");
    }
    const auto& opt = optimal_design();
    TwoPointDesign d;
    d.z1 = opt.z1;
    d.z2 = opt.z2;
    d.x1 = (opt.z1 - estimate.b) / estimate.a;
    d.x2 = (opt.z2 - estimate.b) / estimate.a;
    return d;
}

std::pair<double, double> score(const ModelParams& params, std::span<const Observation> data) {
    double sa = 0.0;
    double sb = 0.0;
    for (const auto& obs : data) {
        const double z = params.a * obs.x + params.b;
        const double t = std::exp(z);
        const double dldz = (obs.y == 1) ? q_weight(t) : -t;
        sa += dldz * obs.x;
        sb += dldz;
    }
    return {sa, sb};
}

InformationMatrix observed_information(const ModelParams& params,
                                       std::span<const Observation> data) {
    InformationMatrix info;
    for (const auto& obs : data) {
        const double z = params.a * obs.x + params.b;
        const double t = std::exp(z);
        // -d^2 l / dz^2; positive for both response values.
        double w = 0.0;
        if (obs.y == 1) {
            const double q = q_weight(t);
            w = q * (t + q - 1.0);
        } else {
            w = t;
        }
        info.j11 += w * obs.x * obs.x;
        info.j12 += w * obs.x;
        info.j22 += w;
    }
    return info;
}

ModelParams fit_mle(std::span<const Observation> data, const ModelParams& start) {
    bool has0 = false;
    bool has1 = false;
    std::set<double> distinct;
    for (const auto& obs : data) {
        (obs.y == 1 ? has1 : has0) = true;
        distinct.insert(obs.x);
    }
    if (!has0 || !has1 || distinct.size() < 2) {
        throw SeparationError(
            "fit_mle: need both response values at two or more distinct covariates");
    }

    constexpr int kMaxIter = 100;
    constexpr double kGradTol = 1e-8;

    ModelParams theta = start;
    double ll = log_likelihood(theta, data);
    for (int it = 0; it < kMaxIter; ++it) {
        const auto [sa, sb] = score(theta, data);
        if (std::hypot(sa, sb) < kGradTol) return theta;

        const InformationMatrix info = observed_information(theta, data);
        const double det = info.det();
        if (!(det > 0.0) || !std::isfinite(det)) {
            throw ConvergenceError("fit_mle: observed information is singular");
        }
        const double da = (info.j22 * sa - info.j12 * sb) / det;
        const double db = (info.j11 * sb - info.j12 * sa) / det;

        // Step halving until the likelihood does not decrease. Decreases at
        // the level of floating-point noise are accepted so the quadratic
        // Newton phase can finish once improvements drop below resolution.
        const double noise = 1e-12 * (1.0 + std::abs(ll));
        double step = 1.0;
        bool accepted = false;
        while (step >= 0x1.0p-40) {
            const ModelParams cand{theta.a + step * da, theta.b + step * db};
            const double cll = log_likelihood(cand, data);
            if (std::isfinite(cll) && cll >= ll - noise) {
                theta = cand;
                ll = cll;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            throw ConvergenceError("fit_mle: no ascent step found");
        }
    }
    throw ConvergenceError("fit_mle: iteration cap reached before gradient tolerance");
}

}  // namespace seqdesign
