#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "fpplab/random.hpp"

namespace fpplab::stats {

double mean(const std::vector<double>& xs);

// Sample variance with the n-1 denominator; needs at least two values.
double variance(const std::vector<double>& xs);

double pearson_correlation(const std::vector<double>& xs,
                           const std::vector<double>& ys);

struct Standardized {
    std::vector<double> values;
    double center;
    double scale;
};

// (x - mean) / sqrt(variance); scale must be positive.
Standardized standardize(const std::vector<double>& xs);

// One-sample Kolmogorov-Smirnov statistic against a reference CDF:
// sup over the sorted sample of max(|i/n - F(x_i)|, |(i-1)/n - F(x_i)|).
double ks_one_sample(std::vector<double> samples,
                     const std::function<double(double)>& cdf);

// Two-sample Kolmogorov-Smirnov statistic (merge scan of both ECDFs).
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// First Wasserstein distance between equal-size samples:
// mean absolute difference of the sorted values. Unequal sizes are an error;
// callers subsample the larger input first (with their own stream).
double wasserstein1(std::vector<double> a, std::vector<double> b);

// Sample (without replacement) k values from xs, for pre-shrinking
// wasserstein1 inputs. k <= xs.size().
std::vector<double> subsample(const std::vector<double>& xs, std::size_t k,
                              rng::RngStream& stream);

// Total variation distance between two finite pmfs on the integers
// (missing keys count as zero mass).
double total_variation(const std::map<std::int64_t, double>& p,
                       const std::map<std::int64_t, double>& q);

// Standard normal CDF, absolute error well below 1e-12.
double normal_cdf(double x);

// Standard Gumbel CDF exp(-exp(-x)).
double gumbel_cdf(double x);

// Exponential(rate) CDF.
double exponential_cdf(double x, double rate);

// n-th harmonic number 1 + 1/2 + ... + 1/n.
double harmonic(std::int64_t n);

struct SpacingsCheck {
    double ks;                // two-sample KS between the two constructions
    double mean_max;          // mean of max of n standard exponentials
    double mean_weighted_sum; // mean of sum_{i=1..n} E_i / i
    double expected_mean;     // harmonic(n), the common expectation
};

// Draws `reps` copies of max(E_1..E_n) and independently `reps` copies of
// sum E_i/i, which share one distribution; reports the comparison.
SpacingsCheck spacings_identity_check(std::int64_t n, std::int64_t reps,
                                      rng::RngStream& stream);

struct Histogram {
    std::vector<double> edges;  // nbins + 1 ascending edges
    std::vector<std::int64_t> counts;
};

// Equal-width histogram over [lo, hi]; values outside are clamped to the
// boundary bins so counts always sum to xs.size().
Histogram histogram(const std::vector<double>& xs, double lo, double hi,
                    int nbins);

}  // namespace fpplab::stats
