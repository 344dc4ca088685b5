#pragma once

// Closed-form link model for a receiver surrounded by a Poisson field of
// Rayleigh-faded interferers, with up to m retransmissions per message.

#include <cstdint>

namespace ppto {

enum class LogBase { natural, two };

/// Path-loss exponent, link distance and interferer density of the reference link.
struct ChannelParams {
    double alpha = 4.0;
    double r0 = 1.0;
    double lambda = 0.0;
    LogBase log_base = LogBase::natural;

    /// Throws ConfigError unless alpha > 2, r0 > 0 and lambda >= 0 (all finite).
    void validate() const;
};

/// Design variables: SIR threshold and retransmission cap (1 + m attempts in total).
struct LinkPolicy {
    double beta = 1.0;
    int m = 0;

    void validate() const;
};

/// Maximum acceptable drop probability after all attempts.
struct QosConstraint {
    double epsilon = 0.01;

    void validate() const;
};

double log_base_divisor(LogBase base);
const char* to_string(LogBase base);

/// k = pi r0^2 Gamma(1 - 2/alpha) Gamma(1 + 2/alpha). Throws DomainError for alpha <= 2.
double geometry_constant(const ChannelParams& params);

/// Per-attempt outage probability 1 - exp(-k lambda beta^(2/alpha)).
double outage_probability(const ChannelParams& params, double beta);

/// Expected attempts per message, sum_{n=0}^{m} p_out^n (exact).
double mean_attempts(double p_out, int m);

/// (1 - eps) / (1 - eps^(1/(1+m))): the attempt count implied by assuming the
/// drop-rate constraint is active. Only used to study the approximation.
double mean_attempts_approx(double epsilon, int m);

/// log(1 + beta) in the configured base.
double spectral_efficiency(const ChannelParams& params, double beta);

/// p_out^(1+m).
double drop_rate(const ChannelParams& params, const LinkPolicy& policy);

/// log(1+beta) / (1 + mbar) * (1 - p_out^(1+m)), with the exact geometric sum for 1 + mbar.
double throughput(const ChannelParams& params, const LinkPolicy& policy);

/// Throughput with the drop-rate constraint held with equality:
/// log(1 + beta*) (1 - eps^(1/(m+1))), beta* = beta_star(params, qos, m).
double constrained_throughput(const ChannelParams& params, const QosConstraint& qos, int m);

/// 1 - eps^(1/(m+1)), the per-attempt success probability when the constraint is active.
double per_attempt_success_at_constraint(double epsilon, int m);

}  // namespace ppto
