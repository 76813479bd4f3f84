#pragma once

#include <cstdint>
#include <vector>

namespace fpplab::rng {

// Counter-keyed pseudo-random stream (xoshiro256++ state, splitmix64 seeding).
// Streams are value types: copying one forks the sequence deliberately.
struct RngStream {
    std::uint64_t s[4];

    std::uint64_t next_u64();

    // Uniform on the open interval (0,1); never returns 0 or 1.
    double uniform();

    // Uniform on {0, 1, ..., bound-1}; bound >= 1. Exact (rejection, no modulo bias).
    std::uint64_t uniform_below(std::uint64_t bound);

    // Exponential with the given rate (> 0), inverse transform.
    double exponential(double rate);

    // Standard Gumbel: -log(E), E standard exponential.
    double gumbel();

    // Standard normal (Box-Muller, stateless: two uniforms per call).
    double normal();

    // Exact Poisson sample; mean must be > 0.
    std::int64_t poisson(double mean);

    // Exact Binomial(n, p) sample; n >= 0, p in [0,1]. Inversion for small
    // n*min(p,1-p), transformed rejection with exact log-density acceptance
    // otherwise. Never a normal approximation.
    std::int64_t binomial(std::int64_t n, double p);

    // Derive an independent child stream keyed by (current state, key).
    // Pure: does not advance this stream.
    RngStream substream(std::uint64_t key) const;
};

// Deterministic stream keyed by (master_seed, stream_index): equal keys give
// equal sequences, distinct keys give decorrelated sequences.
RngStream make_stream(std::uint64_t master_seed, std::uint64_t stream_index);

// Inverse-transform kernel used by RngStream::exponential; exposed so the
// u -> value mapping itself is testable against known points.
double exponential_from_uniform(double u, double rate);

}  // namespace fpplab::rng
