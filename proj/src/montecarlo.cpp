#include "ppto/montecarlo.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>
#include <vector>

#include "ppto/errors.hpp"

namespace ppto {

namespace {

double unit_uniform(RngStream& rng) {
    return std::generate_canonical<double, std::numeric_limits<double>::digits>(rng);
}

// Unit-mean exponential by inverse CDF.
double unit_exponential(RngStream& rng) {
    return -std::log1p(-unit_uniform(rng));
}

double path_gain(double r2, double half_alpha) {
    if (half_alpha == 2.0)
        return 1.0 / (r2 * r2);
    return std::pow(r2, -half_alpha);
}

// Precomputed per-(params, beta, sim) constants for the attempt kernel.
struct AttemptKernel {
    double pi_lambda;
    double window_r2;
    double half_alpha;
    double signal_gain;  // r0^-alpha
    double beta_rho;

    AttemptKernel(const ChannelParams& params, const SimConfig& sim, double beta)
        : pi_lambda(std::numbers::pi * params.lambda),
          window_r2(std::pow(sim.window_radius_factor * params.r0, 2)),
          half_alpha(params.alpha / 2.0),
          signal_gain(std::pow(params.r0, -params.alpha)),
          beta_rho(beta * sim.power_ratio) {}

    // Interferers are generated nearest first (pi lambda r_i^2 are the arrival
    // times of a unit-rate Poisson process), which is the same PPP as uniform
    // placement of a Poisson count. The sum is abandoned as soon as it already
    // forces an outage.
    bool succeeds(RngStream& rng) const {
        const double g0 = unit_exponential(rng);
        if (pi_lambda == 0.0)
            return true;
        const double budget = g0 * signal_gain / beta_rho;  // outage iff I >= budget
        double arrival = 0.0;
        double interference = 0.0;
        for (;;) {
            arrival += unit_exponential(rng);
            const double r2 = arrival / pi_lambda;
            if (r2 > window_r2)
                return true;
            interference += unit_exponential(rng) * path_gain(r2, half_alpha);
            if (interference >= budget)
                return false;
        }
    }
};

struct OutageTally {
    std::uint64_t trials = 0;
    std::uint64_t outages = 0;
};

struct ProtocolTally {
    std::uint64_t messages = 0;
    std::uint64_t delivered = 0;
    std::uint64_t attempts = 0;
    std::uint64_t attempts_sq = 0;
    std::uint64_t delivered_attempts = 0;  // sum over delivered messages of their attempts
};

// Each message owns a generator seeded from its block stream, so runs that differ
// only in window radius see the same draws message by message.
RngStream message_stream(RngStream& block) {
    return RngStream(block());
}

std::uint64_t block_count(std::uint64_t n) {
    return (n + kMessagesPerBlock - 1) / kMessagesPerBlock;
}

std::uint64_t block_size(std::uint64_t n, std::uint64_t b) {
    const std::uint64_t start = b * kMessagesPerBlock;
    return std::min(kMessagesPerBlock, n - start);
}

// Runs fn(block_index) for every block, spreading blocks over `streams` threads.
// Each block writes only its own slot; the caller reduces in block order.
template <class Fn>
void for_each_block(std::uint64_t blocks, unsigned streams, Fn&& fn) {
    const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(std::max(1u, streams), blocks));
    if (workers <= 1) {
        for (std::uint64_t b = 0; b < blocks; ++b)
            fn(b);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::uint64_t b = w; b < blocks; b += workers)
                fn(b);
        });
    }
}

McEstimate bernoulli_estimate(std::uint64_t hits, std::uint64_t n) {
    McEstimate e;
    e.n = n;
    e.mean = static_cast<double>(hits) / static_cast<double>(n);
    e.std_error = std::sqrt(e.mean * (1.0 - e.mean) / static_cast<double>(n));
    return e;
}

}  // namespace

double truncated_interference_mean(const ChannelParams& params, const SimConfig& sim) {
    const double radius = sim.window_radius_factor * params.r0;
    return sim.power_ratio * 2.0 * std::numbers::pi * params.lambda * std::pow(radius, 2.0 - params.alpha) /
           (params.alpha - 2.0);
}

double truncation_bias_limit(const ChannelParams& params) {
    return 1e-3 * geometry_constant(params) * params.lambda * std::pow(params.r0, -params.alpha);
}

void SimConfig::validate(const ChannelParams& params) const {
    params.validate();
    if (!(window_radius_factor > 1.0) || !std::isfinite(window_radius_factor))
        throw ConfigError("window_radius_factor must be a finite value > 1");
    if (n_messages < 1)
        throw ConfigError("n_messages must be >= 1");
    if (!(power_ratio > 0.0) || !std::isfinite(power_ratio))
        throw ConfigError("power_ratio must be a finite value > 0");
    if (streams < 1)
        throw ConfigError("streams must be >= 1");
    if (params.lambda > 0.0) {
        const double tail = truncated_interference_mean(params, *this);
        const double limit = truncation_bias_limit(params);
        if (!(tail < limit)) {
            std::ostringstream msg;
            msg << "window_radius_factor " << window_radius_factor
                << " truncates too much interference: neglected mean " << tail << " >= limit " << limit;
            throw ConfigError(msg.str());
        }
    }
}

RngStream seeded_stream(std::uint64_t seed, std::uint64_t stream_index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_index), static_cast<std::uint32_t>(stream_index >> 32),
                      0x70707430u};
    return RngStream(seq);
}

AttemptSample sample_sir(const ChannelParams& params, const SimConfig& sim, double beta, RngStream& rng) {
    const double radius = sim.window_radius_factor * params.r0;
    const double window_r2 = radius * radius;
    const double half_alpha = params.alpha / 2.0;

    AttemptSample s;
    const double signal = unit_exponential(rng) * std::pow(params.r0, -params.alpha);
    const double mean_count = params.lambda * std::numbers::pi * window_r2;
    if (mean_count > 0.0) {
        std::poisson_distribution<std::uint64_t> count(mean_count);
        s.n_interferers = count(rng);
    }
    double interference = 0.0;
    for (std::uint64_t i = 0; i < s.n_interferers; ++i) {
        const double r2 = window_r2 * unit_uniform(rng);
        interference += unit_exponential(rng) * path_gain(r2, half_alpha);
    }
    interference *= sim.power_ratio;
    s.sir = interference > 0.0 ? signal / interference : std::numeric_limits<double>::infinity();
    s.success = s.sir > beta;
    return s;
}

McEstimate estimate_outage(const ChannelParams& params, double beta, const SimConfig& sim) {
    sim.validate(params);
    if (!(beta > 0.0))
        throw ConfigError("beta must be > 0");
    if (sim.n_messages < 1000)
        throw ConfigError("estimate_outage needs n_messages >= 1000");
    const AttemptKernel kernel(params, sim, beta);
    const std::uint64_t blocks = block_count(sim.n_messages);
    std::vector<OutageTally> tallies(blocks);
    for_each_block(blocks, sim.streams, [&](std::uint64_t b) {
        RngStream rng = seeded_stream(sim.seed, b);
        OutageTally& t = tallies[b];
        t.trials = block_size(sim.n_messages, b);
        for (std::uint64_t i = 0; i < t.trials; ++i) {
            RngStream message = message_stream(rng);
            if (!kernel.succeeds(message))
                ++t.outages;
        }
    });
    OutageTally total;
    for (const OutageTally& t : tallies) {
        total.trials += t.trials;
        total.outages += t.outages;
    }
    return bernoulli_estimate(total.outages, total.trials);
}

ProtocolReport simulate_protocol(const ChannelParams& params, const LinkPolicy& policy, const SimConfig& sim) {
    sim.validate(params);
    policy.validate();
    const AttemptKernel kernel(params, sim, policy.beta);
    const std::uint64_t blocks = block_count(sim.n_messages);
    const std::uint64_t max_attempts = static_cast<std::uint64_t>(policy.m) + 1;
    std::vector<ProtocolTally> tallies(blocks);
    for_each_block(blocks, sim.streams, [&](std::uint64_t b) {
        RngStream rng = seeded_stream(sim.seed, b);
        ProtocolTally& t = tallies[b];
        t.messages = block_size(sim.n_messages, b);
        for (std::uint64_t i = 0; i < t.messages; ++i) {
            RngStream message = message_stream(rng);
            std::uint64_t used = 0;
            bool delivered = false;
            while (used < max_attempts && !delivered) {
                ++used;
                delivered = kernel.succeeds(message);
            }
            t.attempts += used;
            t.attempts_sq += used * used;
            if (delivered) {
                ++t.delivered;
                t.delivered_attempts += used;
            }
        }
    });
    ProtocolTally total;
    for (const ProtocolTally& t : tallies) {
        total.messages += t.messages;
        total.delivered += t.delivered;
        total.attempts += t.attempts;
        total.attempts_sq += t.attempts_sq;
        total.delivered_attempts += t.delivered_attempts;
    }

    const double n = static_cast<double>(total.messages);
    const double s = static_cast<double>(total.delivered);
    const double a = static_cast<double>(total.attempts);
    const double a2 = static_cast<double>(total.attempts_sq);
    const double sa = static_cast<double>(total.delivered_attempts);

    ProtocolReport r;
    r.total_attempts = total.attempts;
    r.drop_rate = bernoulli_estimate(total.messages - total.delivered, total.messages);

    const double mean_a = a / n;
    r.mean_attempts.n = total.messages;
    r.mean_attempts.mean = mean_a;
    r.mean_attempts.std_error = std::sqrt(std::max(0.0, a2 / n - mean_a * mean_a) / n);

    // Ratio-of-sums estimator; delta-method variance of d_i = s_i - R a_i.
    const double ratio = s / a;
    const double var_d = std::max(0.0, (s - 2.0 * ratio * sa + ratio * ratio * a2) / n);
    const double eff = spectral_efficiency(params, policy.beta);
    r.throughput.n = total.messages;
    r.throughput.mean = eff * ratio;
    r.throughput.std_error = eff * std::sqrt(var_d / n) / mean_a;
    return r;
}

}  // namespace ppto
