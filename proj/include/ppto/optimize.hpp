#pragma once

// Joint (beta, m) design of the reference link.
//
// The constrained problem maximizes throughput subject to a drop-rate ceiling
// eps. For a fixed m the constraint is active at the optimum, which pins
// beta*(m) in closed form; m* is then found by an integer scan. The
// unconstrained problem drops the retransmission machinery and maximizes
// log(1+beta) exp(-k lambda beta^(2/alpha)) over beta through its
// stationarity condition.

#include <optional>
#include <vector>

#include "ppto/analytic.hpp"

namespace ppto {

struct SearchConfig {
    int m_max = 1000;
    double bracket_hi_init = 1e3;
    double root_tol = 1e-10;
    int max_bracket_expansions = 60;

    void validate() const;
};

struct OptimumReport {
    double beta_star = 0.0;
    std::optional<int> m_star;  // empty for the unconstrained problem
    double throughput_star = 0.0;
    double p_out_at_opt = 0.0;
    double mean_attempts_at_opt = 1.0;
    double drop_rate = 0.0;
    /// lambda == 0: no interference, beta is unbounded and so is throughput.
    bool interference_free = false;
    /// The scan's argmax sits on SearchConfig::m_max, so the ceiling may be binding.
    bool ceiling_binding = false;
};

/// Closed-form threshold that makes p_out^(1+m) == eps.
/// Throws DomainError when lambda == 0 (constraint never binds).
double beta_star(const ChannelParams& params, const QosConstraint& qos, int m);

/// constrained_throughput for m = 0..m_hi.
std::vector<double> constrained_scan(const ChannelParams& params, const QosConstraint& qos, int m_hi);

/// True when the sequence never increases again after its first strict decrease.
bool is_unimodal(const std::vector<double>& values);

/// Best retransmission cap over {0, ..., min(m_cap, cfg.m_max)}, ties to the smallest m.
OptimumReport m_star(const ChannelParams& params, const QosConstraint& qos,
                     const SearchConfig& cfg = {}, std::optional<int> m_cap = std::nullopt);

/// alpha beta - 2 beta^(2/alpha) k lambda (1+beta) ln(1+beta); positive below the
/// unconstrained optimum and negative above it.
double stationarity_residual(const ChannelParams& params, double beta);

/// Unconstrained throughput log(1+beta) exp(-k lambda beta^(2/alpha)).
double unconstrained_throughput(const ChannelParams& params, double beta);

/// Unique positive root of stationarity_residual. Throws SolverError on bracketing
/// failure or when the probe grid shows more than one sign change.
double beta_star_unconstrained(const ChannelParams& params, const SearchConfig& cfg = {});

OptimumReport optimum_unconstrained(const ChannelParams& params, const SearchConfig& cfg = {});

struct OptimaGap {
    double relative_gap = 0.0;  // (T_un - T_con) / T_un
    OptimumReport constrained;
    OptimumReport unconstrained;
};

OptimaGap verify_optima_coincide(const ChannelParams& params, const QosConstraint& qos,
                                 const SearchConfig& cfg = {});

}  // namespace ppto
