#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace levylab {

// splitmix64 finaliser; used for seeding and sub-stream derivation.
std::uint64_t mix64(std::uint64_t x);

// Seeded random stream (xoshiro256**). All sampling in the library goes
// through this class so results are bit-reproducible across platforms;
// no <random> distributions are used.
//
// Sub-streams are derived from the stream's key, never from its state, so
// derivation is independent of how much the parent stream has been consumed.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed);

    RngStream derive(std::uint64_t stream_id) const;
    RngStream derive(std::string_view label) const;

    std::uint64_t next_u64();

    // uniform on (0,1)
    double uniform();

    // standard normal (Box-Muller, cached spare)
    double gaussian();

    // Poisson(mean): product-of-uniforms inversion for mean < 30,
    // PTRS transformed rejection above.
    std::uint64_t poisson(double mean);

    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Sampler for a finite discrete distribution given unnormalised weights.
// CDF inversion by binary search; deterministic given the stream.
class DiscreteSampler {
public:
    explicit DiscreteSampler(const std::vector<double>& weights);
    std::size_t sample(RngStream& rng) const;
    double total() const { return total_; }

private:
    std::vector<double> cdf_;
    double total_ = 0.0;
};

} // namespace levylab
