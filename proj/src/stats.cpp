#include "fpplab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fpplab::stats {

double mean(const std::vector<double>& xs) {
    if (xs.empty()) throw std::domain_error("mean: empty sample");
    return std::accumulate(xs.begin(), xs.end(), 0.0) /
           static_cast<double>(xs.size());
}

double variance(const std::vector<double>& xs) {
    if (xs.size() < 2) throw std::domain_error("variance: need at least 2 values");
    const double m = mean(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - m) * (x - m);
    return acc / static_cast<double>(xs.size() - 1);
}

double pearson_correlation(const std::vector<double>& xs,
                           const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::domain_error("pearson_correlation: need equal sizes >= 2");
    const double mx = mean(xs);
    const double my = mean(ys);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw std::domain_error("pearson_correlation: zero variance input");
    return sxy / std::sqrt(sxx * syy);
}

Standardized standardize(const std::vector<double>& xs) {
    const double m = mean(xs);
    const double sd = std::sqrt(variance(xs));
    if (!(sd > 0.0)) throw std::domain_error("standardize: zero spread");
    Standardized out;
    out.center = m;
    out.scale = sd;
    out.values.reserve(xs.size());
    for (double x : xs) out.values.push_back((x - m) / sd);
    return out;
}

double ks_one_sample(std::vector<double> samples,
                     const std::function<double(double)>& cdf) {
    if (samples.empty()) throw std::domain_error("ks_one_sample: empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double sup = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        const double hi = (static_cast<double>(i) + 1.0) / n - f;
        const double lo = f - static_cast<double>(i) / n;
        sup = std::max(sup, std::max(std::fabs(hi), std::fabs(lo)));
    }
    return sup;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::domain_error("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double sup = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        sup = std::max(sup, std::fabs(static_cast<double>(i) / na -
                                      static_cast<double>(j) / nb));
    }
    return sup;
}

double wasserstein1(std::vector<double> a, std::vector<double> b) {
    if (a.size() != b.size() || a.empty())
        throw std::domain_error("wasserstein1: need equal nonempty sizes");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::fabs(a[i] - b[i]);
    return acc / static_cast<double>(a.size());
}

std::vector<double> subsample(const std::vector<double>& xs, std::size_t k,
                              rng::RngStream& stream) {
    if (k > xs.size()) throw std::domain_error("subsample: k larger than sample");
    std::vector<double> pool = xs;
    // Partial Fisher-Yates: first k slots end up a uniform subset.
    for (std::size_t t = 0; t < k; ++t) {
        const std::size_t r =
            t + static_cast<std::size_t>(stream.uniform_below(pool.size() - t));
        std::swap(pool[t], pool[r]);
    }
    pool.resize(k);
    return pool;
}

double total_variation(const std::map<std::int64_t, double>& p,
                       const std::map<std::int64_t, double>& q) {
    double acc = 0.0;
    for (const auto& [k, v] : p) {
        const auto it = q.find(k);
        acc += std::fabs(v - (it == q.end() ? 0.0 : it->second));
    }
    for (const auto& [k, v] : q) {
        if (p.find(k) == p.end()) acc += std::fabs(v);
    }
    return 0.5 * acc;
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x * 0.70710678118654752440084436210485);
}

double gumbel_cdf(double x) { return std::exp(-std::exp(-x)); }

double exponential_cdf(double x, double rate) {
    if (!(rate > 0.0)) throw std::domain_error("exponential_cdf: rate must be > 0");
    return x <= 0.0 ? 0.0 : -std::expm1(-rate * x);
}

double harmonic(std::int64_t n) {
    if (n < 1) throw std::domain_error("harmonic: n must be >= 1");
    double acc = 0.0;
    for (std::int64_t i = n; i >= 1; --i) acc += 1.0 / static_cast<double>(i);
    return acc;
}

SpacingsCheck spacings_identity_check(std::int64_t n, std::int64_t reps,
                                      rng::RngStream& stream) {
    if (n < 1 || reps < 2)
        throw std::domain_error("spacings_identity_check: need n >= 1, reps >= 2");
    std::vector<double> maxima(static_cast<std::size_t>(reps));
    std::vector<double> sums(static_cast<std::size_t>(reps));
    for (std::int64_t r = 0; r < reps; ++r) {
        double mx = 0.0;
        for (std::int64_t i = 0; i < n; ++i)
            mx = std::max(mx, stream.exponential(1.0));
        maxima[static_cast<std::size_t>(r)] = mx;
    }
    for (std::int64_t r = 0; r < reps; ++r) {
        double acc = 0.0;
        for (std::int64_t i = 1; i <= n; ++i)
            acc += stream.exponential(1.0) / static_cast<double>(i);
        sums[static_cast<std::size_t>(r)] = acc;
    }
    SpacingsCheck out;
    out.mean_max = mean(maxima);
    out.mean_weighted_sum = mean(sums);
    out.expected_mean = harmonic(n);
    out.ks = ks_two_sample(std::move(maxima), std::move(sums));
    return out;
}

Histogram histogram(const std::vector<double>& xs, double lo, double hi,
                    int nbins) {
    if (!(hi > lo) || nbins < 1) throw std::domain_error("histogram: bad range");
    Histogram h;
    h.edges.resize(static_cast<std::size_t>(nbins) + 1);
    for (int i = 0; i <= nbins; ++i)
        h.edges[static_cast<std::size_t>(i)] =
            lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(nbins);
    h.counts.assign(static_cast<std::size_t>(nbins), 0);
    for (double x : xs) {
        int b = static_cast<int>(std::floor((x - lo) / (hi - lo) *
                                            static_cast<double>(nbins)));
        b = std::clamp(b, 0, nbins - 1);
        ++h.counts[static_cast<std::size_t>(b)];
    }
    return h;
}

}  // namespace fpplab::stats
