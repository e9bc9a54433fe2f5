#pragma once

#include <span>
#include <utility>
#include <vector>

#include "seqdesign/errors.hpp"

namespace seqdesign {

// Parameters of the complementary log-log response P(Y=1) = 1 - exp(-exp(a*x + b)).
// a is the slope (must be positive for the covariate back-solve), b the intercept.
struct ModelParams {
    double a = 1.0;
    double b = 0.0;
};

struct Observation {
    double x = 0.0;  // covariate (pulse height)
    int y = 0;       // binary response, 0 or 1
};

// Accumulated Fisher information, symmetric 2x2 stored as three entries:
//   [ j11 j12 ]   j11 = sum g(z_i) x_i^2
//   [ j12 j22 ]   j12 = sum g(z_i) x_i,  j22 = sum g(z_i)
struct InformationMatrix {
    double j11 = 0.0;
    double j12 = 0.0;
    double j22 = 0.0;

    double det() const { return j11 * j22 - j12 * j12; }

    InformationMatrix& operator+=(const InformationMatrix& o) {
        j11 += o.j11;
        j12 += o.j12;
        j22 += o.j22;
        return *this;
    }
    friend InformationMatrix operator+(InformationMatrix a, const InformationMatrix& b) {
        a += b;
        return a;
    }
};

// The locally D-optimal two-point design: standardized points z1 > z2 and the
// covariates x_i = (z_i - b)/a they map to under a parameter estimate.
struct TwoPointDesign {
    double z1 = 0.0;
    double z2 = 0.0;
    double x1 = 0.0;
    double x2 = 0.0;
};

/// P(Y=1 | a, b, x). Total function, saturates to exact 0/1 for |a*x+b| beyond ~40.
double prob_response(const ModelParams& params, double x);

/// Log-likelihood of independent binary observations. Empty data gives 0;
/// a y=1 observation whose success probability underflows gives -inf.
double log_likelihood(const ModelParams& params, std::span<const Observation> data);

/// Weight g(z) = e^{2z} / (e^{e^z} - 1) appearing in the Fisher information.
double g_weight(double z);

/// Fisher information of a design under the given parameters. Additive over
/// concatenated designs; empty design gives the zero matrix.
InformationMatrix fisher_information(const ModelParams& params, std::span<const double> xs);

/// D-criterion sqrt(det J). Clamps round-off-negative determinants to 0 and
/// rejects matrices whose determinant is negative beyond round-off.
double d_criterion(const InformationMatrix& j);

/// The standardized D-optimal pair (z1*, z2*), z1* > z2*, maximizing
/// g(z1)g(z2)(z1-z2)^2. Deterministic (Newton with grid multistart).
std::pair<double, double> solve_optimal_design();

/// sqrt of the maximal g(z1)g(z2)(z1-z2)^2, i.e. the per-double-measurement
/// criterion gain of the optimal design under (a,b) = (1,0).
double optimal_design_criterion();

/// Covariates realizing the optimal standardized points under an estimate.
TwoPointDesign optimal_covariates(const ModelParams& estimate);

/// Maximum-likelihood estimate by damped Newton on the score (cap 100
/// iterations, gradient tolerance 1e-8). Requires both response values and
/// at least two distinct covariates.
ModelParams fit_mle(std::span<const Observation> data, const ModelParams& start);

/// Score (gradient of the log-likelihood) at the given parameters.
std::pair<double, double> score(const ModelParams& params, std::span<const Observation> data);

/// Observed information (negative Hessian of the log-likelihood).
InformationMatrix observed_information(const ModelParams& params,
                                       std::span<const Observation> data);

}  // namespace seqdesign
