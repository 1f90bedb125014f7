#include <cmath>
#include <numbers>

#include "bmsim/error.hpp"
#include "bmsim/laws.hpp"
#include "doctest.h"
#include "oracles.hpp"

namespace laws = bmsim::laws;

TEST_CASE("normal_cdf against the series oracle")
{
    CHECK(laws::normal_cdf(0.0) == 0.5);
    // Phi(1) from the series oracle, cross-checked against Simpson quadrature of the density.
    const double phi1_series = oracle::normal_cdf_series(1.0);
    const double phi1_quad = 0.5 + oracle::simpson(oracle::normal_pdf, 0.0, 1.0, 2000);
    CHECK(std::abs(phi1_series - phi1_quad) < 1e-12);
    CHECK(std::abs(phi1_series - 0.8413447461) < 1e-10);
    CHECK(std::abs(laws::normal_cdf(1.0) - phi1_series) <= 1e-10);

    for (double x = -8.0; x <= 8.0; x += 0.0625) {
        INFO("x = " << x);
        CHECK(std::abs(laws::normal_cdf(x) - oracle::normal_cdf_series(x)) <= 1e-10);
    }
    for (const double x : {0.1, 1.0, 3.0}) {
        CHECK(std::abs(laws::normal_cdf(-x) + laws::normal_cdf(x) - 1.0) < 1e-15);
    }
}

TEST_CASE("max_cdf_complement")
{
    const double expected_11 = 2.0 * (1.0 - oracle::normal_cdf_series(1.0));
    CHECK(std::abs(expected_11 - 0.3173105078) < 1e-10);
    CHECK(std::abs(laws::max_cdf_complement(1.0, 1.0) - expected_11) < 1e-12);

    const double expected_14 = 2.0 * (1.0 - oracle::normal_cdf_series(0.5));
    CHECK(std::abs(expected_14 - 0.6170750774) < 1e-10);
    CHECK(std::abs(laws::max_cdf_complement(1.0, 4.0) - expected_14) < 1e-12);

    CHECK(laws::max_cdf_complement(60.0, 1.0) == 0.0);
    CHECK_THROWS_AS(laws::max_cdf_complement(0.0, 1.0), bmsim::DomainError);
    CHECK_THROWS_AS(laws::max_cdf_complement(1.0, -1.0), bmsim::DomainError);
}

TEST_CASE("reflection_joint_prob")
{
    const double expected = 1.0 - oracle::normal_cdf_series(2.0);
    CHECK(std::abs(expected - 0.0227501319) < 1e-10);
    CHECK(std::abs(laws::reflection_joint_prob(1.0, 0.0, 1.0) - expected) < 1e-12);

    // b -> a recovers half the maximum tail.
    CHECK(std::abs(laws::reflection_joint_prob(1.0, 1.0 - 1e-9, 1.0) - 0.1586552539) < 1e-9);
    CHECK(std::abs(0.5 * laws::max_cdf_complement(1.0, 1.0) - 0.1586552539) < 1e-10);

    CHECK(laws::reflection_joint_prob(1.0, 0.0, 1e-6) < 1e-300);
    CHECK_THROWS_AS(laws::reflection_joint_prob(1.0, 1.0, 1.0), bmsim::DomainError);
    CHECK_THROWS_AS(laws::reflection_joint_prob(1.0, 2.0, 1.0), bmsim::DomainError);
}

TEST_CASE("reflection_joint_prob is increasing in b and decreasing in a")
{
    for (int i = 0; i < 20; ++i) {
        const double a = 0.1 + 0.2 * i;
        for (int j = 0; j < 20; ++j) {
            const double t = 0.25 + 0.25 * j;
            double previous = -1.0;
            for (int k = 0; k < 20; ++k) {
                const double b = a - 4.0 + 0.2 * k;  // b < a throughout
                const double p = laws::reflection_joint_prob(a, b, t);
                REQUIRE(p >= previous);
                REQUIRE(p <= laws::reflection_joint_prob(a - 0.05, b, t) + 1e-300);
                previous = p;
            }
        }
    }
}

TEST_CASE("hitting time cdf and density")
{
    CHECK(std::abs(laws::hitting_cdf(1.0, 1.0) - 0.3173105078) < 1e-10);
    CHECK(laws::hitting_cdf(1.0, 1.0) == laws::max_cdf_complement(1.0, 1.0));
    const double expected_density = std::exp(-0.5) / std::sqrt(2.0 * std::numbers::pi);
    CHECK(std::abs(expected_density - 0.2419707245) < 1e-10);
    CHECK(std::abs(laws::hitting_density(1.0, 1.0) - expected_density) < 1e-15);
    CHECK(laws::hitting_cdf(1.0, 1e-4) < 1e-300);
    CHECK_THROWS_AS(laws::hitting_cdf(1.0, 0.0), bmsim::DomainError);
    CHECK_THROWS_AS(laws::hitting_density(0.0, 1.0), bmsim::DomainError);
    CHECK_THROWS_AS(laws::hitting_density(1.0, 0.0), bmsim::DomainError);
}

TEST_CASE("hitting density integrates to the cdf")
{
    for (const auto [a, horizon] : {std::pair{1.0, 1.0}, std::pair{1.0, 4.0}, std::pair{2.0, 1.0}}) {
        // The density vanishes faster than any power at 0+, so a tiny left cut is harmless.
        const double integral =
            oracle::simpson([a = a](double s) { return laws::hitting_density(a, s); }, 1e-6, horizon, 200000);
        CHECK(std::abs(integral - laws::hitting_cdf(a, horizon)) < 1e-6);
    }
}

TEST_CASE("arcsine law")
{
    CHECK(std::abs(laws::arcsine_cdf(0.5) - 0.5) < 1e-15);
    CHECK(laws::arcsine_cdf(1.0) == 1.0);
    CHECK(laws::arcsine_cdf(0.0) == 0.0);
    CHECK(std::abs(laws::arcsine_cdf(0.25) - 1.0 / 3.0) < 1e-15);
    for (const double s : {0.1, 0.3, 0.5}) {
        CHECK(std::abs(laws::arcsine_cdf(s) + laws::arcsine_cdf(1.0 - s) - 1.0) < 1e-12);
    }
    CHECK_THROWS_AS(laws::arcsine_cdf(-0.1), bmsim::DomainError);
    CHECK_THROWS_AS(laws::arcsine_cdf(1.1), bmsim::DomainError);
}

TEST_CASE("arcsine cdf matches the last-zero decomposition by quadrature")
{
    // P(L <= s) = int p_s(0, x) P^x(tau_0 > 1 - s) dx, with P^x(tau_0 > u) = 2 Phi(|x|/sqrt u) - 1.
    for (const double s : {0.1, 0.25, 0.5, 0.75, 0.9}) {
        const double u = 1.0 - s;
        const auto integrand = [&](double x) {
            const double heat = oracle::normal_pdf(x / std::sqrt(s)) / std::sqrt(s);
            return heat * (2.0 * oracle::normal_cdf_series(std::abs(x) / std::sqrt(u)) - 1.0);
        };
        const double bound = 12.0 * std::sqrt(s);
        const double value = 2.0 * oracle::simpson(integrand, 0.0, bound, 20000);
        INFO("s = " << s);
        CHECK(std::abs(value - laws::arcsine_cdf(s)) < 1e-9);
    }
}

TEST_CASE("truncated hitting density")
{
    CHECK(std::abs(laws::truncated_hitting_density(2.0) - 1.0 / (2.0 * std::numbers::pi)) < 1e-15);
    CHECK(std::abs(laws::truncated_hitting_density(2.0) - 0.1591549431) < 1e-10);
    CHECK(std::abs(laws::truncated_hitting_density(1.25) - 0.5092958179) < 1e-10);
    CHECK(laws::truncated_hitting_density(1e12) < 1e-17);
    CHECK_THROWS_AS(laws::truncated_hitting_density(1.0), bmsim::DomainError);
    CHECK_THROWS_AS(laws::truncated_hitting_density(0.5), bmsim::DomainError);

    // t = 1 + u^2 turns the density into 2 / (pi (1 + u^2)); integrate u over [0, U] and add
    // the analytic tail (2/pi)(pi/2 - atan U).
    const auto integrand = [](double u) { return laws::truncated_hitting_density(1.0 + u * u) * 2.0 * u; };
    const double head = oracle::simpson([&](double u) { return u == 0.0 ? 2.0 / std::numbers::pi : integrand(u); },
                                        0.0, 1000.0, 400000);
    const double tail = 2.0 / std::numbers::pi * (std::numbers::pi / 2.0 - std::atan(1000.0));
    CHECK(std::abs(head + tail - 1.0) < 1e-6);

    // The closed-form cdf is the integral of the density.
    for (const double t : {1.5, 2.0, 4.0, 8.0}) {
        const double u = std::sqrt(t - 1.0);
        const double integral =
            oracle::simpson([&](double v) { return v == 0.0 ? 2.0 / std::numbers::pi : integrand(v); }, 0.0, u, 20000);
        CHECK(std::abs(laws::truncated_hitting_cdf(t) - integral) < 1e-10);
    }
    CHECK(laws::truncated_hitting_cdf(0.5) == 0.0);
}

TEST_CASE("covariance kernels")
{
    CHECK(laws::bm_covariance(0.3, 0.7) == 0.3);
    CHECK(laws::bridge_covariance(0.5, 0.5) == 0.25);
    CHECK(laws::bridge_covariance(0.25, 0.75) == 0.0625);
    for (const double t : {0.0, 0.2, 0.9, 1.0}) {
        CHECK(laws::bridge_covariance(0.0, t) == 0.0);
        CHECK(laws::bridge_covariance(1.0, t) == 0.0);
    }
    CHECK_THROWS_AS(laws::bridge_covariance(1.5, 0.5), bmsim::DomainError);
}

TEST_CASE("Karhunen-Loeve eigenpairs")
{
    CHECK(std::abs(laws::kl_eigenpair(1).eigenvalue - 4.0 / (std::numbers::pi * std::numbers::pi)) < 1e-16);
    CHECK(std::abs(laws::kl_eigenpair(1).eigenvalue - 0.4052847346) < 1e-10);
    for (int j = 1; j < 40; ++j) {
        CHECK(laws::kl_eigenpair(j)(0.0) == 0.0);
    }
    CHECK_THROWS_AS(laws::kl_eigenpair(0), bmsim::DomainError);

    // Trace identity: partial sums approach int_0^1 t dt = 1/2; tail beyond J is ~ 1/(pi^2 J).
    long double trace = 0.0L;
    for (std::int64_t j = 1000000; j >= 1; --j) {
        trace += laws::kl_eigenpair(j).eigenvalue;
    }
    CHECK(std::abs(static_cast<double>(trace) - 0.5) < 1e-6);
}

TEST_CASE("eigenfunctions are orthonormal by quadrature")
{
    for (int i = 1; i <= 50; ++i) {
        for (int j = i; j <= 50; ++j) {
            const auto fi = laws::kl_eigenpair(i);
            const auto fj = laws::kl_eigenpair(j);
            const double inner = oracle::simpson([&](double t) { return fi(t) * fj(t); }, 0.0, 1.0, 10000);
            REQUIRE(std::abs(inner - (i == j ? 1.0 : 0.0)) < 1e-8);
        }
    }
}

TEST_CASE("Mercer partial sums recover min(s, t)")
{
    long double sum = 0.0L;
    for (int j = 10000; j >= 1; --j) {
        const auto pair = laws::kl_eigenpair(j);
        sum += pair.eigenvalue * pair(0.3) * pair(0.7);
    }
    CHECK(std::abs(static_cast<double>(sum) - 0.3) < 1e-3);
}

TEST_CASE("levy modulus")
{
    CHECK(std::abs(laws::levy_modulus(1.0 / std::numbers::e) - std::sqrt(2.0 / std::numbers::e)) < 1e-15);
    CHECK(std::abs(laws::levy_modulus(1.0 / std::numbers::e) - 0.8577638850) < 1e-10);
    CHECK(std::abs(laws::levy_modulus(0.01) - 0.3034854259) < 1e-10);
    double previous = 0.0;
    for (double delta = 1.0 / std::numbers::e; delta > 1e-12; delta /= 2.0) {
        const double ratio = laws::levy_modulus(delta) / std::sqrt(delta);
        CHECK(ratio > previous);
        previous = ratio;
    }
    CHECK_THROWS_AS(laws::levy_modulus(0.0), bmsim::DomainError);
    CHECK_THROWS_AS(laws::levy_modulus(1.0), bmsim::DomainError);
}

TEST_CASE("name-based law evaluation")
{
    const auto eval = laws::evaluate_law("arcsine_cdf", {{"s", 0.25}});
    CHECK(eval.law_name == "arcsine_cdf");
    CHECK(std::abs(eval.value - 1.0 / 3.0) < 1e-15);
    CHECK(laws::evaluate_law("kl_eigenvalue", {{"j", 1}}).value == laws::kl_eigenpair(1).eigenvalue);
    CHECK_THROWS_AS(laws::evaluate_law("no_such_law", {}), bmsim::ConfigError);
    CHECK_THROWS_AS(laws::evaluate_law("hitting_cdf", {{"a", 1.0}}), bmsim::ConfigError);
    CHECK_THROWS_AS(laws::evaluate_law("hitting_density", {{"a", 1.0}, {"T", 0.0}}), bmsim::DomainError);
    for (const auto& info : laws::law_catalog()) {
        laws::Params params;
        for (const auto name : info.params) {
            params[std::string(name)] = name == "j" ? 2.0 : (name == "b" ? 0.0 : (name == "t" && info.name.starts_with("truncated") ? 2.0 : 0.5));
        }
        CHECK_NOTHROW(laws::evaluate_law(info.name, params));
    }

    const auto max_cdf = laws::distribution_cdf("running_max", {{"t", 1.0}});
    CHECK(std::abs(max_cdf(1.0) - (1.0 - 0.3173105078)) < 1e-10);
    CHECK(max_cdf(-1.0) == 0.0);
    const auto normal = laws::distribution_cdf("normal", {{"mean", 0.0}, {"variance", 0.25}});
    CHECK(std::abs(normal(0.5) - laws::normal_cdf(1.0)) < 1e-15);
    CHECK_THROWS_AS(laws::distribution_cdf("cauchy", {}), bmsim::ConfigError);
}
