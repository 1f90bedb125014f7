#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace bmsim::laws {

/// Standard normal CDF.
double normal_cdf(double x);

/// P^0(M(t) > a) = 2(1 - Phi(a / sqrt(t))) for the running maximum M.
double max_cdf_complement(double a, double t);

/// P^0(M(t) > a, B(t) < b) = P^0(B(t) > 2a - b); requires a > 0, b < a, t > 0.
double reflection_joint_prob(double a, double b, double t);

/// P^0(tau_a <= T) for the first hitting time of a > 0.
double hitting_cdf(double a, double horizon);

/// Inverse Gaussian density of tau_a: a / sqrt(2 pi T^3) exp(-a^2 / 2T).
double hitting_density(double a, double horizon);

/// P^0(L <= s) = (2/pi) arcsin(sqrt(s)) for the last zero L before time 1.
double arcsine_cdf(double s);

/// Density of gamma_0 = inf{t > 1 : B(t) = 0}: 1 / (pi t sqrt(t - 1)), t > 1.
double truncated_hitting_density(double t);

/// Closed-form antiderivative of truncated_hitting_density: (2/pi) atan(sqrt(t - 1)); 0 for t <= 1.
double truncated_hitting_cdf(double t);

/// Cov(B(s), B(t)) = min(s, t).
double bm_covariance(double s, double t);

/// Cov(W(s), W(t)) = min(s, t) - s t for the bridge W(x) = B(x) - x B(1).
double bridge_covariance(double s, double t);

/// Karhunen-Loeve eigenpair of the kernel min(s, t) on [0, 1].
struct KlEigenpair {
    std::int64_t index = 1;
    double eigenvalue = 0.0;

    /// phi_j(t) = sqrt(2) sin((j - 1/2) pi t)
    [[nodiscard]] double operator()(double t) const;
};

KlEigenpair kl_eigenpair(std::int64_t j);

/// Levy modulus g(delta) = sqrt(2 delta log(1/delta)), delta in (0, 1).
double levy_modulus(double delta);

// ---------------------------------------------------------------------------
// Name-based access, used by experiment configs and law tables.

using Params = std::map<std::string, double, std::less<>>;

struct LawEval {
    std::string law_name;
    Params params;
    double value = 0.0;
};

struct LawInfo {
    std::string_view name;
    std::vector<std::string_view> params;
};

/// Every law reachable by name, with its parameter names in call order.
const std::vector<LawInfo>& law_catalog();

/// Throws ConfigError for an unknown law or a missing parameter; domain errors propagate.
LawEval evaluate_law(std::string_view name, const Params& params);

using Cdf = std::function<double(double)>;

/// CDF of a named distribution, for goodness-of-fit tests:
///   normal(mean, variance), uniform, running_max(t), hitting_time(a),
///   arcsine, truncated_hitting.
Cdf distribution_cdf(std::string_view name, const Params& params);

}  // namespace bmsim::laws
