#pragma once

#include <cstdint>
#include <vector>

#include "seqdesign/cloglog.hpp"

namespace seqdesign {

// Approximate expected gain in D from one double measurement given the
// accumulated criterion D:
//   h(D) = h_star / (1 + e^{eta} * D^{theta})
// with the fitted constants below. h is increasing in D and saturates at
// h_star, the per-double-measurement gain of the exact optimal design.
struct AccumulationModel {
    double h_star = 0.80940268;
    double eta = 1.88938;
    double theta = -1.51330;

    bool valid() const { return h_star > 0.0 && theta < 0.0; }
};

/// h(D) for D > 0.
double h(const AccumulationModel& model, double d);

struct ExpectedChangeResult {
    double mean = 0.0;       // mean simulated per-double-measurement gain
    double stddev = 0.0;     // sample standard deviation of the gains
    long n_samples = 0;      // accepted draws
    long n_rejected = 0;     // draws discarded for a_hat <= 0
};

/// Monte-Carlo estimate of the expected criterion gain of one double
/// measurement placed at the optimal design of a noisy estimate:
/// draws (a_hat, b_hat) ~ N((1,0), J(D)^{-1}) with J(D) = (D/h*) J*, maps the
/// optimal z* through the estimate, and averages sqrt(g(z1)g(z2))*(z1-z2).
/// Draws with a_hat <= 0 are rejected and redrawn (counted in the result).
ExpectedChangeResult estimate_expected_change(double d, long n_samples, std::uint64_t seed);

/// Continuous-limit (Cs = 0) minimal time to grow the criterion from d to
/// d_final: the closed form of the integral of 1/h.
double min_time_closed_form(const AccumulationModel& model, double d, double d_final);

/// Continuous-limit (Cs = 0) accumulated gain D(T) - D(t) along the flow
/// D'(s) = h(D(s)), integrated with step-halved classical RK4 to relative 1e-8.
double max_d_continuous(const AccumulationModel& model, double d, double t, double t_final);

/// Mean absolute accumulation discrepancy
///   | sqrt(det(J_1+..+J_n)) - sqrt(det(J_1+..+J_{n-1})) - sqrt(det(J_n)) |
/// over replications, for n = 2..n_max. Round n draws its estimate with
/// accumulated information J(D_start + n*h_star). The sequence trends to 0.
std::vector<double> accumulation_convergence_check(int n_max, double d_start, int n_reps,
                                                   std::uint64_t seed);

}  // namespace seqdesign
