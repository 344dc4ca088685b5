#include "ppto/optimize.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "ppto/errors.hpp"

namespace ppto {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

OptimumReport interference_free_report(std::optional<int> m) {
    OptimumReport r;
    r.beta_star = kInf;
    r.m_star = m;
    r.throughput_star = kInf;
    r.p_out_at_opt = 0.0;
    r.mean_attempts_at_opt = 1.0;
    r.drop_rate = 0.0;
    r.interference_free = true;
    return r;
}

}  // namespace

void SearchConfig::validate() const {
    if (m_max < 1)
        throw ConfigError("m_max must be positive");
    if (!(bracket_hi_init > 0.0) || !std::isfinite(bracket_hi_init))
        throw ConfigError("bracket_hi_init must be positive");
    if (!(root_tol > 0.0))
        throw ConfigError("root_tol must be positive");
    if (max_bracket_expansions < 1)
        throw ConfigError("max_bracket_expansions must be positive");
}

double beta_star(const ChannelParams& params, const QosConstraint& qos, int m) {
    params.validate();
    qos.validate();
    if (m < 0)
        throw DomainError("beta_star requires m >= 0");
    if (params.lambda == 0.0)
        throw DomainError("beta_star undefined without interference (lambda = 0): beta is unbounded");
    const double k = geometry_constant(params);
    // 1 - eps^(1/(m+1)) via expm1, no cancellation for large m
    const double success = per_attempt_success_at_constraint(qos.epsilon, m);
    return std::pow(-std::log(success) / (k * params.lambda), params.alpha / 2.0);
}

std::vector<double> constrained_scan(const ChannelParams& params, const QosConstraint& qos, int m_hi) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(m_hi) + 1);
    for (int m = 0; m <= m_hi; ++m)
        out.push_back(constrained_throughput(params, qos, m));
    return out;
}

bool is_unimodal(const std::vector<double>& values) {
    bool decreasing = false;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] < values[i - 1])
            decreasing = true;
        else if (decreasing && values[i] > values[i - 1])
            return false;
    }
    return true;
}

OptimumReport m_star(const ChannelParams& params, const QosConstraint& qos, const SearchConfig& cfg,
                     std::optional<int> m_cap) {
    params.validate();
    qos.validate();
    cfg.validate();
    if (m_cap && *m_cap < 0)
        throw ConfigError("m_cap must be >= 0");
    const int m_hi = m_cap ? std::min(*m_cap, cfg.m_max) : cfg.m_max;
    if (params.lambda == 0.0)
        return interference_free_report(0);

    const std::vector<double> scan = constrained_scan(params, qos, m_hi);
    int best = 0;
    for (int m = 1; m <= m_hi; ++m)
        if (scan[m] > scan[best])
            best = m;

    OptimumReport r;
    r.m_star = best;
    r.beta_star = beta_star(params, qos, best);
    r.throughput_star = scan[best];
    r.p_out_at_opt = outage_probability(params, r.beta_star);
    r.mean_attempts_at_opt = mean_attempts(r.p_out_at_opt, best);
    r.drop_rate = drop_rate(params, LinkPolicy{r.beta_star, best});
    r.ceiling_binding = best == cfg.m_max;
    return r;
}

double stationarity_residual(const ChannelParams& params, double beta) {
    const double k = geometry_constant(params);
    return params.alpha * beta -
           2.0 * std::pow(beta, 2.0 / params.alpha) * k * params.lambda * (1.0 + beta) * std::log1p(beta);
}

double unconstrained_throughput(const ChannelParams& params, double beta) {
    const double k = geometry_constant(params);
    return spectral_efficiency(params, beta) * std::exp(-k * params.lambda * std::pow(beta, 2.0 / params.alpha));
}

double beta_star_unconstrained(const ChannelParams& params, const SearchConfig& cfg) {
    params.validate();
    cfg.validate();
    if (params.lambda == 0.0)
        throw DomainError("unconstrained optimum is unbounded without interference (lambda = 0)");
    auto g = [&](double b) { return stationarity_residual(params, b); };

    double hi = cfg.bracket_hi_init;
    double lo = cfg.bracket_hi_init;
    int expansions = 0;
    while (g(hi) >= 0.0) {
        if (++expansions > cfg.max_bracket_expansions) {
            std::ostringstream msg;
            msg << "no sign change of the stationarity residual up to beta = " << hi
                << " after " << cfg.max_bracket_expansions << " expansions (g = " << g(hi) << ")";
            throw SolverError(msg.str());
        }
        lo = hi;
        hi *= 2.0;
    }
    expansions = 0;
    while (g(lo) <= 0.0) {
        if (++expansions > cfg.max_bracket_expansions) {
            std::ostringstream msg;
            msg << "no positive stationarity residual down to beta = " << lo
                << " after " << cfg.max_bracket_expansions << " contractions";
            throw SolverError(msg.str());
        }
        hi = lo;
        lo *= 0.5;
    }

    // Sign pattern over 64 log-spaced probes spanning well below the bracket;
    // a single + to - transition is expected.
    {
        const double probe_lo = std::min(lo, 1e-6);
        const double ratio = std::log(hi / probe_lo) / 63.0;
        int changes = 0;
        bool prev = g(probe_lo) > 0.0;
        for (int i = 1; i < 64; ++i) {
            const bool cur = g(probe_lo * std::exp(ratio * i)) > 0.0;
            if (cur != prev)
                ++changes;
            prev = cur;
        }
        if (changes != 1) {
            std::ostringstream msg;
            msg << "stationarity residual changes sign " << changes << " times on [" << probe_lo << ", " << hi
                << "]; root not unique";
            throw SolverError(msg.str());
        }
    }

    // Geometric bisection down to the floating-point resolution of the bracket.
    for (int it = 0; it < 400; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (!(mid > lo && mid < hi))
            break;
        if (g(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
        if ((hi - lo) <= 4.0 * std::numeric_limits<double>::epsilon() * hi)
            break;
    }
    const double root = std::abs(g(lo)) <= std::abs(g(hi)) ? lo : hi;
    if ((hi - lo) / root > cfg.root_tol) {
        std::ostringstream msg;
        msg << "bisection stalled with relative bracket width " << (hi - lo) / root;
        throw SolverError(msg.str());
    }
    return root;
}

OptimumReport optimum_unconstrained(const ChannelParams& params, const SearchConfig& cfg) {
    params.validate();
    if (params.lambda == 0.0)
        return interference_free_report(std::nullopt);
    OptimumReport r;
    r.beta_star = beta_star_unconstrained(params, cfg);
    r.throughput_star = unconstrained_throughput(params, r.beta_star);
    r.p_out_at_opt = outage_probability(params, r.beta_star);
    r.mean_attempts_at_opt = 1.0;
    r.drop_rate = r.p_out_at_opt;
    return r;
}

OptimaGap verify_optima_coincide(const ChannelParams& params, const QosConstraint& qos, const SearchConfig& cfg) {
    OptimaGap gap;
    gap.constrained = m_star(params, qos, cfg);
    gap.unconstrained = optimum_unconstrained(params, cfg);
    if (gap.unconstrained.interference_free)
        return gap;
    gap.relative_gap =
        (gap.unconstrained.throughput_star - gap.constrained.throughput_star) / gap.unconstrained.throughput_star;
    return gap;
}

}  // namespace ppto
