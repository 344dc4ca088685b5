#include "ppto/analytic.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ppto/errors.hpp"
#include "ppto/optimize.hpp"

namespace ppto {

void ChannelParams::validate() const {
    if (!std::isfinite(alpha) || alpha <= 2.0)
        throw ConfigError("alpha must be a finite value > 2, got " + std::to_string(alpha));
    if (!std::isfinite(r0) || r0 <= 0.0)
        throw ConfigError("r0 must be a finite value > 0, got " + std::to_string(r0));
    if (!std::isfinite(lambda) || lambda < 0.0)
        throw ConfigError("lambda must be a finite value >= 0, got " + std::to_string(lambda));
}

void LinkPolicy::validate() const {
    if (!std::isfinite(beta) || beta <= 0.0)
        throw ConfigError("beta must be a finite value > 0, got " + std::to_string(beta));
    if (m < 0)
        throw ConfigError("m must be >= 0, got " + std::to_string(m));
}

void QosConstraint::validate() const {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw ConfigError("epsilon must lie in (0, 1), got " + std::to_string(epsilon));
}

double log_base_divisor(LogBase base) {
    return base == LogBase::two ? std::numbers::ln2 : 1.0;
}

const char* to_string(LogBase base) {
    return base == LogBase::two ? "2" : "e";
}

double geometry_constant(const ChannelParams& params) {
    if (!(params.alpha > 2.0))
        throw DomainError("geometry constant requires alpha > 2");
    const double x = 2.0 / params.alpha;
    return std::numbers::pi * params.r0 * params.r0 * std::tgamma(1.0 - x) * std::tgamma(1.0 + x);
}

namespace {

// k * lambda * beta^(2/alpha): P_out = 1 - exp(-exponent)
double outage_exponent(const ChannelParams& params, double beta) {
    params.validate();
    if (!(beta > 0.0))
        throw DomainError("beta must be > 0");
    return geometry_constant(params) * params.lambda * std::pow(beta, 2.0 / params.alpha);
}

}  // namespace

double outage_probability(const ChannelParams& params, double beta) {
    return -std::expm1(-outage_exponent(params, beta));
}

double mean_attempts(double p_out, int m) {
    if (!(p_out >= 0.0 && p_out < 1.0))
        throw DomainError("mean_attempts requires 0 <= p_out < 1");
    if (m < 0)
        throw DomainError("mean_attempts requires m >= 0");
    if (m == 0 || p_out == 0.0)
        return 1.0;
    // (1 - p^(m+1)) / (1 - p)
    return -std::expm1((m + 1.0) * std::log(p_out)) / (1.0 - p_out);
}

double mean_attempts_approx(double epsilon, int m) {
    QosConstraint{epsilon}.validate();
    return (1.0 - epsilon) / per_attempt_success_at_constraint(epsilon, m);
}

double per_attempt_success_at_constraint(double epsilon, int m) {
    return -std::expm1(std::log(epsilon) / (m + 1.0));
}

double spectral_efficiency(const ChannelParams& params, double beta) {
    return std::log1p(beta) / log_base_divisor(params.log_base);
}

double drop_rate(const ChannelParams& params, const LinkPolicy& policy) {
    const double survival = std::exp(-outage_exponent(params, policy.beta));
    return survival == 1.0 ? 0.0 : std::exp((policy.m + 1.0) * std::log1p(-survival));
}

double throughput(const ChannelParams& params, const LinkPolicy& policy) {
    params.validate();
    policy.validate();
    // work with the per-attempt success 1 - P_out directly so that nothing cancels as P_out -> 1
    const double survival = std::exp(-outage_exponent(params, policy.beta));
    if (survival == 0.0)
        return 0.0;
    const double delivered =
        survival == 1.0 ? 1.0 : -std::expm1((policy.m + 1.0) * std::log1p(-survival));
    const double attempts = delivered / survival;
    return spectral_efficiency(params, policy.beta) * delivered / attempts;
}

double constrained_throughput(const ChannelParams& params, const QosConstraint& qos, int m) {
    const double beta = beta_star(params, qos, m);
    return spectral_efficiency(params, beta) * per_attempt_success_at_constraint(qos.epsilon, m);
}

}  // namespace ppto
