#pragma once

#include <cstdint>
#include <vector>

#include "fpplab/random.hpp"

namespace fpplab::theory {

struct LimitConstants {
    double lambda;
    double beta;        // lambda/(lambda-1): hopcount scale
    double gamma;       // 1/(lambda-1): weight scale
    double p_lambda;    // extinction probability: smallest root of p=exp(-lambda(1-p))
    double mu_lambda;   // conjugate mean in (0,1): mu e^{-mu} = lambda e^{-lambda}
    double theta_star;  // positive root of theta = lambda(1-e^{-theta})
    double c_lambda;    // gamma + 2/|log mu|: max-weight radius
    double d_lambda;    // beta + 2/|log mu| = c + 1: max-hopcount radius
};

// All limit constants for one offspring mean; lambda must exceed 1.
LimitConstants constants(double lambda);

// Laplace transform phi(t) = E[exp(-t W)] of the branching limit variable,
// solved on a log-spaced grid by fixed-point iteration with the mean pinned
// to lambda after every step (the functional equation alone fixes phi only up
// to rescaling of t).
struct PhiGrid {
    double lambda;
    double gamma;
    std::vector<double> t;    // t[0] = 0, then log-spaced to t_max
    std::vector<double> phi;  // phi[0] = 1
    double implied_mean;      // (1 - phi(t_1))/t_1, pinned to lambda
    double pinned_residual;   // sup-norm step change at convergence
    double raw_map_residual;  // sup |map(phi) - phi| without re-pinning
    int iterations;

    // Interpolated evaluation: exact at nodes, linear in log t between them,
    // linear near 0, clamped beyond the grid.
    double eval(double x) const;
};

PhiGrid solve_phi(double lambda, int grid_points = 512, double t_max = 50.0,
                  int max_iterations = 400, double tol = 1e-10);

// One resampling round of the distributional identity behind the functional
// equation: W' = sum over a Poisson(lambda) number of atoms of
// e^{-(lambda-1) X_i} W_i with X_i standard exponentials and W_i drawn from
// the population. Applying it repeatedly leaves the W law invariant.
std::vector<double> recursion_resample(const std::vector<double>& population,
                                       double lambda, int rounds,
                                       rng::RngStream& stream);

// One draw of the limit of the centered two-endpoint weight:
// gamma(log E - log(gamma W1) - log(gamma W2)), W's conditioned positive
// (run length m per draw).
double sample_limit_X(double lambda, std::int64_t m, rng::RngStream& stream);

// One draw of the dense-regime weight limit M1 + M2 - M3 of standard Gumbels.
double sample_dense_limit(rng::RngStream& stream);

struct DenseCenteringReport {
    double lambda_n;
    double beta_n;               // lambda_n/(lambda_n - 1)
    double discriminant;         // (beta_n - 1) sqrt(log n)
    bool centering_replaceable;  // discriminant < 0.1: log n may replace beta_n log n
};

DenseCenteringReport dense_centering_report(std::int64_t n, double lambda_n);

}  // namespace fpplab::theory
