#pragma once

// Monte Carlo model of the reference link: a fresh Poisson field of
// interferers on a disk around the receiver for every attempt, unit-mean
// exponential (Rayleigh power) fading on every link, and ARQ that drops a
// message after 1 + m failed attempts.
//
// Messages are processed in fixed blocks of kMessagesPerBlock; block b draws
// from seeded_stream(seed, b), which seeds one generator per message.
// SimConfig::streams only sets how many worker threads consume blocks, so
// estimates do not depend on it.

#include <cstdint>
#include <random>

#include "ppto/analytic.hpp"

namespace ppto {

inline constexpr std::uint64_t kMessagesPerBlock = 4096;

struct SimConfig {
    double window_radius_factor = 100.0;  // disk radius R = factor * r0
    std::uint64_t n_messages = 100000;
    std::uint64_t seed = 0;
    double power_ratio = 1.0;  // interferer over reference transmit power
    unsigned streams = 1;

    /// Throws ConfigError on non-positive fields or when the mean interference
    /// neglected outside the disk violates truncation_bias_limit.
    void validate(const ChannelParams& params) const;
};

/// Mean interference power from the plane outside the disk,
/// power_ratio * 2 pi lambda R^(2-alpha) / (alpha - 2).
double truncated_interference_mean(const ChannelParams& params, const SimConfig& sim);

/// Largest admissible truncated_interference_mean: 1e-3 k lambda r0^-alpha.
double truncation_bias_limit(const ChannelParams& params);

using RngStream = std::mt19937_64;

/// Deterministic generator for substream `stream_index` of `seed`.
RngStream seeded_stream(std::uint64_t seed, std::uint64_t stream_index);

struct AttemptSample {
    double sir = 0.0;
    bool success = false;  // sir > beta
    std::uint64_t n_interferers = 0;
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t n = 0;
};

/// One attempt: N ~ Poisson(lambda pi R^2) interferers placed uniformly on the disk.
AttemptSample sample_sir(const ChannelParams& params, const SimConfig& sim, double beta, RngStream& rng);

/// Fraction of independent attempts in outage (SIR <= beta). Requires n_messages >= 1000.
McEstimate estimate_outage(const ChannelParams& params, double beta, const SimConfig& sim);

struct ProtocolReport {
    McEstimate throughput;     // log(1+beta) * successes / attempts
    McEstimate drop_rate;      // messages failing all 1 + m attempts
    McEstimate mean_attempts;  // attempts consumed per message
    std::uint64_t total_attempts = 0;
};

ProtocolReport simulate_protocol(const ChannelParams& params, const LinkPolicy& policy, const SimConfig& sim);

}  // namespace ppto
