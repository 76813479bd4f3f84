#include "fpplab/random.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fpplab::rng {

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

inline std::uint64_t splitmix_step(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

RngStream stream_from_key(std::uint64_t key) {
    RngStream r;
    bool all_zero = true;
    for (int i = 0; i < 4; ++i) {
        r.s[i] = splitmix_step(key);
        all_zero = all_zero && r.s[i] == 0;
    }
    if (all_zero) r.s[0] = 1;
    return r;
}

}  // namespace

std::uint64_t RngStream::next_u64() {
    const std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
}

double RngStream::uniform() {
    // 53-bit mantissa offset by half an ulp: range [2^-54, 1 - 2^-54].
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t RngStream::uniform_below(std::uint64_t bound) {
    if (bound == 0) throw std::domain_error("uniform_below: bound must be >= 1");
    if (bound == 1) return 0;
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() / bound * bound;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % bound;
}

double exponential_from_uniform(double u, double rate) {
    return -std::log(u) / rate;
}

double RngStream::exponential(double rate) {
    if (!(rate > 0.0)) throw std::domain_error("exponential: rate must be > 0");
    return exponential_from_uniform(uniform(), rate);
}

double RngStream::gumbel() {
    return -std::log(exponential(1.0));
}

double RngStream::normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

std::int64_t RngStream::poisson(double mean) {
    if (!(mean > 0.0)) throw std::domain_error("poisson: mean must be > 0");
    if (mean < 10.0) {
        // Multiplicative inversion (product of uniforms vs e^-mean).
        const double limit = std::exp(-mean);
        std::int64_t k = 0;
        double prod = uniform();
        while (prod > limit) {
            ++k;
            prod *= uniform();
        }
        return k;
    }
    // Transformed rejection (PTRS), exact via log-density acceptance.
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = uniform() - 0.5;
        const double v = uniform();
        const double us = 0.5 - std::fabs(u);
        const double kd = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r) return static_cast<std::int64_t>(kd);
        if (kd < 0.0 || (us < 0.013 && v > us)) continue;
        const double k = kd;
        if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
            k * loglam - mean - std::lgamma(k + 1.0)) {
            return static_cast<std::int64_t>(kd);
        }
    }
}

std::int64_t RngStream::binomial(std::int64_t n, double p) {
    if (n < 0) throw std::domain_error("binomial: n must be >= 0");
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("binomial: p must be in [0,1]");
    if (n == 0 || p == 0.0) return 0;
    if (p == 1.0) return n;
    const bool flipped = p > 0.5;
    const double q = flipped ? 1.0 - p : p;
    const double nd = static_cast<double>(n);
    std::int64_t k;
    if (nd * q <= 10.0) {
        // Sequential inversion over the pmf recurrence.
        const double s = q / (1.0 - q);
        const double a = (nd + 1.0) * s;
        for (;;) {
            double r = std::exp(nd * std::log1p(-q));
            double u = uniform();
            k = 0;
            bool ok = true;
            while (u > r) {
                u -= r;
                ++k;
                if (k > n) {  // float-tail guard; restart with a fresh uniform
                    ok = false;
                    break;
                }
                r *= (a / static_cast<double>(k) - s);
            }
            if (ok) break;
        }
    } else {
        // Transformed rejection (BTRS) with exact log-binomial acceptance.
        const double spq = std::sqrt(nd * q * (1.0 - q));
        const double b = 1.15 + 2.53 * spq;
        const double a = -0.0873 + 0.0248 * b + 0.01 * q;
        const double c = nd * q + 0.5;
        const double alpha = (2.83 + 5.1 / b) * spq;
        const double v_r = 0.92 - 4.2 / b;
        const double urvr = 0.86 * v_r;
        const double m = std::floor((nd + 1.0) * q);
        const double logit = std::log(q / (1.0 - q));
        const double h_m = std::lgamma(m + 1.0) + std::lgamma(nd - m + 1.0);
        for (;;) {
            double v = uniform();
            double u;
            if (v <= urvr) {
                u = v / v_r - 0.43;
                k = static_cast<std::int64_t>(
                    std::floor((2.0 * a / (0.5 - std::fabs(u)) + b) * u + c));
                if (k < 0 || k > n) continue;
                break;
            }
            if (v >= v_r) {
                u = uniform() - 0.5;
            } else {
                u = v / v_r - 0.93;
                u = (u < 0.0 ? -0.5 : 0.5) - u;
                v = uniform() * v_r;
            }
            const double us = 0.5 - std::fabs(u);
            const double kd = std::floor((2.0 * a / us + b) * u + c);
            if (kd < 0.0 || kd > nd) continue;
            v = v * alpha / (a / (us * us) + b);
            const double accept = h_m - std::lgamma(kd + 1.0) -
                                  std::lgamma(nd - kd + 1.0) + (kd - m) * logit;
            if (std::log(v) <= accept) {
                k = static_cast<std::int64_t>(kd);
                break;
            }
        }
    }
    return flipped ? n - k : k;
}

RngStream RngStream::substream(std::uint64_t key) const {
    std::uint64_t mix = s[0];
    mix = splitmix_step(mix) ^ rotl(s[1], 13);
    mix = splitmix_step(mix) ^ rotl(s[2], 29);
    mix = splitmix_step(mix) ^ rotl(s[3], 47);
    mix = splitmix_step(mix) ^ (key * 0xD2B74407B1CE6E93ULL + 0x632BE59BD9B4E019ULL);
    return stream_from_key(splitmix_step(mix));
}

RngStream make_stream(std::uint64_t master_seed, std::uint64_t stream_index) {
    std::uint64_t a = master_seed;
    const std::uint64_t ka = splitmix_step(a);
    std::uint64_t b = stream_index + 0x9E3779B97F4A7C15ULL;
    const std::uint64_t kb = splitmix_step(b);
    return stream_from_key(ka ^ (kb * 0xD2B74407B1CE6E93ULL + 0x632BE59BD9B4E019ULL));
}

}  // namespace fpplab::rng
