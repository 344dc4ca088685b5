#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "ppto/analytic.hpp"
#include "ppto/errors.hpp"
#include "ppto/optimize.hpp"

using namespace ppto;

namespace {

ChannelParams channel(double lambda, double alpha = 4.0, double r0 = 1.0, LogBase base = LogBase::natural) {
    return ChannelParams{alpha, r0, lambda, base};
}

bool rel_close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

}  // namespace

TEST_SUITE("analytic") {

TEST_CASE("geometry constant against frozen high-precision values") {
    CHECK(geometry_constant(channel(0.0)) == doctest::Approx(oracle::kAlpha4).epsilon(1e-13));
    CHECK(geometry_constant(channel(0.0, 4.0, 2.0)) == doctest::Approx(oracle::kAlpha4R2).epsilon(1e-13));
    CHECK(geometry_constant(channel(0.0, 3.0)) == doctest::Approx(oracle::kAlpha3).epsilon(1e-13));
    CHECK(geometry_constant(channel(0.0, 4.0)) == doctest::Approx(std::numbers::pi * std::numbers::pi / 2));
}

TEST_CASE("geometry constant matches the reflection-formula route on (2, 12]") {
    for (double alpha = 2.05; alpha <= 12.0; alpha += 0.05)
        for (double r0 : {0.3, 1.0, 7.5})
            CHECK(rel_close(geometry_constant(channel(0.0, alpha, r0)), oracle::geometry_constant(alpha, r0), 1e-12));
}

TEST_CASE("geometry constant blows up as alpha approaches 2") {
    CHECK(geometry_constant(channel(0.0, 2.01)) == doctest::Approx(oracle::kAlpha2_01).epsilon(1e-11));
    CHECK(geometry_constant(channel(0.0, 2.01)) > 10.0 * geometry_constant(channel(0.0, 4.0)));
    CHECK_THROWS_AS(geometry_constant(channel(0.0, 2.0)), DomainError);
    CHECK_THROWS_AS(geometry_constant(channel(0.0, 1.5)), DomainError);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(channel(0.1, 2.0).validate(), ConfigError);
    CHECK_THROWS_AS(channel(0.1, 4.0, 0.0).validate(), ConfigError);
    CHECK_THROWS_AS(channel(-0.1).validate(), ConfigError);
    CHECK_THROWS_AS(channel(std::numeric_limits<double>::quiet_NaN()).validate(), ConfigError);
    CHECK_NOTHROW(channel(0.0).validate());
    CHECK_THROWS_AS((LinkPolicy{0.0, 1}.validate()), ConfigError);
    CHECK_THROWS_AS((LinkPolicy{1.0, -1}.validate()), ConfigError);
    CHECK_THROWS_AS(QosConstraint{0.0}.validate(), ConfigError);
    CHECK_THROWS_AS(QosConstraint{1.0}.validate(), ConfigError);
    CHECK_THROWS_AS(outage_probability(channel(0.1), 0.0), DomainError);
}

TEST_CASE("outage probability examples") {
    CHECK(outage_probability(channel(0.0), 3.0) == 0.0);
    CHECK(outage_probability(channel(0.1), 1.0) == doctest::Approx(oracle::kPout_l01_b1).epsilon(1e-13));
    CHECK(outage_probability(channel(0.05), 6.14) == doctest::Approx(oracle::kPout_l005_b614).epsilon(1e-13));
    CHECK(outage_probability(channel(0.2), 1.67) == doctest::Approx(oracle::kPout_l02_b167).epsilon(1e-13));
}

TEST_CASE("outage probability is increasing in beta, lambda and r0") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> beta_d(0.01, 50.0), lambda_d(0.001, 0.5), r0_d(0.2, 3.0),
        alpha_d(2.2, 6.0), bump(1.001, 2.0);
    for (int i = 0; i < 2000; ++i) {
        const double alpha = alpha_d(rng), lambda = lambda_d(rng), r0 = r0_d(rng), beta = beta_d(rng);
        const double p = outage_probability(channel(lambda, alpha, r0), beta);
        REQUIRE(p >= 0.0);
        REQUIRE(p <= 1.0);
        if (oracle::geometry_constant(alpha, r0) * lambda * std::pow(beta, 2.0 / alpha) < 30.0)
            REQUIRE(p < 1.0);
        REQUIRE(rel_close(p, oracle::outage(alpha, r0, lambda, beta), 1e-11));
        const double f = bump(rng);
        if (p < 0.999) {
            CHECK(outage_probability(channel(lambda, alpha, r0), beta * f) > p);
            CHECK(outage_probability(channel(lambda * f, alpha, r0), beta) > p);
            CHECK(outage_probability(channel(lambda, alpha, r0 * f), beta) > p);
        }
    }
}

TEST_CASE("mean attempts examples and the summation oracle") {
    CHECK(mean_attempts(0.0, 5) == 1.0);
    CHECK(mean_attempts(0.7, 0) == 1.0);
    CHECK(mean_attempts(0.5, 3) == doctest::Approx(1.875).epsilon(1e-15));
    for (double p : {0.01, 0.3, 0.5, 0.9, 0.99})
        for (int m : {1, 2, 5, 17, 60})
            CHECK(rel_close(mean_attempts(p, m), oracle::attempts_by_summation(p, m), 1e-13));
    CHECK_THROWS_AS(mean_attempts(1.0, 2), DomainError);
    CHECK_THROWS_AS(mean_attempts(0.2, -1), DomainError);
}

TEST_CASE("mean attempts is increasing in p (m >= 1) and in m (p > 0)") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> p_d(0.01, 0.95);
    std::uniform_int_distribution<int> m_d(1, 30);
    for (int i = 0; i < 2000; ++i) {
        const double p = p_d(rng);
        const int m = m_d(rng);
        if (std::pow(p, m + 1) < 1e-12)  // next term below double resolution
            continue;
        CHECK(mean_attempts(p * 1.02, m) > mean_attempts(p, m));
        CHECK(mean_attempts(p, m + 1) > mean_attempts(p, m));
        CHECK(mean_attempts(p, 0) == 1.0);
    }
}

TEST_CASE("throughput examples") {
    CHECK(throughput(channel(0.0, 4.0, 1.0, LogBase::two), LinkPolicy{1.0, 0}) == doctest::Approx(1.0));
    CHECK(throughput(channel(0.1), LinkPolicy{1.0, 0}) == doctest::Approx(oracle::kT_l01_b1_m0).epsilon(1e-13));
    const double tiny = throughput(channel(0.1), LinkPolicy{1e-12, 3});
    CHECK(tiny > 0.0);
    CHECK(tiny < 1e-11);
    CHECK(throughput(channel(0.1), LinkPolicy{1e-6, 0}) < throughput(channel(0.1), LinkPolicy{1e-3, 0}));
}

TEST_CASE("log base is a constant factor") {
    for (double beta : {0.3, 2.0, 11.0}) {
        const LinkPolicy pol{beta, 3};
        CHECK(throughput(channel(0.07, 4.0, 1.0, LogBase::two), pol) ==
              doctest::Approx(throughput(channel(0.07), pol) / std::numbers::ln2).epsilon(1e-14));
    }
}

TEST_CASE("exact geometric sum cancels: T == log(1+beta)(1 - P_out)") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> lambda_d(0.0, 0.4), lb_d(std::log(0.01), std::log(100.0));
    std::uniform_int_distribution<int> m_d(0, 40);
    for (int i = 0; i < 3000; ++i) {
        const ChannelParams p = channel(lambda_d(rng));
        const LinkPolicy pol{std::exp(lb_d(rng)), m_d(rng)};
        const double k = oracle::geometry_constant(4.0, 1.0);
        const double expected = std::log1p(pol.beta) * std::exp(-k * p.lambda * std::sqrt(pol.beta));
        REQUIRE(rel_close(throughput(p, pol), expected, 1e-12));
    }
}

TEST_CASE("constrained throughput examples") {
    const ChannelParams p = channel(0.05);
    CHECK(constrained_throughput(p, QosConstraint{0.02}, 4) ==
          doctest::Approx(oracle::kTc_l005_e002_m4).epsilon(1e-12));
    CHECK(constrained_throughput(channel(0.1), QosConstraint{0.01}, 5) ==
          doctest::Approx(oracle::kTc_l01_e001_m5).epsilon(1e-12));
    // eps -> 1 leaves no room for success
    CHECK(constrained_throughput(p, QosConstraint{1.0 - 1e-12}, 3) < 1e-9);
    for (int m : {0, 3, 9, 40})
        CHECK(rel_close(constrained_throughput(p, QosConstraint{0.02}, m),
                        oracle::constrained_T(4.0, 1.0, 0.05, 0.02, m), 1e-11));
}

TEST_CASE("active constraint: constrained throughput equals the general throughput") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> lambda_d(0.005, 0.4), beta_d(0.2, 40.0);
    std::uniform_int_distribution<int> m_d(0, 25);
    for (int i = 0; i < 1000; ++i) {
        const ChannelParams p = channel(lambda_d(rng));
        const LinkPolicy pol{beta_d(rng), m_d(rng)};
        const double eps = drop_rate(p, pol);
        if (!(eps > 1e-300 && eps < 1.0))
            continue;
        REQUIRE(rel_close(constrained_throughput(p, QosConstraint{eps}, pol.m), throughput(p, pol), 1e-9));
    }
}

TEST_CASE("approximate attempt count") {
    // at eps = P^(1+m) the approximation is the exact sum
    const ChannelParams p = channel(0.1);
    const LinkPolicy pol{2.0, 4};
    const double eps = drop_rate(p, pol);
    CHECK(mean_attempts_approx(eps, pol.m) ==
          doctest::Approx(mean_attempts(outage_probability(p, pol.beta), pol.m)).epsilon(1e-12));
    CHECK(mean_attempts_approx(0.5, 0) == doctest::Approx(1.0));
}

}  // TEST_SUITE
