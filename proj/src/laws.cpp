#include "bmsim/laws.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bmsim/error.hpp"

namespace bmsim::laws {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInvSqrt2 = 0.70710678118654752440;

double param(const Params& params, std::string_view law, std::string_view key)
{
    const auto it = params.find(key);
    if (it == params.end()) {
        throw ConfigError("law '" + std::string(law) + "' requires parameter '" + std::string(key) + "'");
    }
    return it->second;
}

}  // namespace

double normal_cdf(double x)
{
    if (std::isnan(x)) {
        throw DomainError("normal_cdf: NaN argument");
    }
    return 0.5 * std::erfc(-x * kInvSqrt2);
}

double max_cdf_complement(double a, double t)
{
    if (!(a > 0.0) || !(t > 0.0)) {
        throw DomainError("max_cdf_complement: requires a > 0 and t > 0");
    }
    // 2(1 - Phi(x)) == erfc(x / sqrt 2), without cancellation in the tail.
    return std::erfc(a / std::sqrt(t) * kInvSqrt2);
}

double reflection_joint_prob(double a, double b, double t)
{
    if (!(a > 0.0) || !(t > 0.0)) {
        throw DomainError("reflection_joint_prob: requires a > 0 and t > 0");
    }
    if (!(b < a)) {
        throw DomainError("reflection_joint_prob: requires b < a");
    }
    return 0.5 * std::erfc((2.0 * a - b) / std::sqrt(t) * kInvSqrt2);
}

double hitting_cdf(double a, double horizon)
{
    if (!(a > 0.0) || !(horizon > 0.0)) {
        throw DomainError("hitting_cdf: requires a > 0 and T > 0");
    }
    return max_cdf_complement(a, horizon);
}

double hitting_density(double a, double horizon)
{
    if (!(a > 0.0) || !(horizon > 0.0)) {
        throw DomainError("hitting_density: requires a > 0 and T > 0");
    }
    return a / std::sqrt(2.0 * kPi * horizon * horizon * horizon) * std::exp(-a * a / (2.0 * horizon));
}

double arcsine_cdf(double s)
{
    if (!(s >= 0.0 && s <= 1.0)) {
        throw DomainError("arcsine_cdf: s outside [0, 1]");
    }
    return 2.0 * std::asin(std::sqrt(s)) / kPi;
}

double truncated_hitting_density(double t)
{
    if (!(t > 1.0) || std::isinf(t)) {
        throw DomainError("truncated_hitting_density: requires 1 < t < inf");
    }
    return 1.0 / (kPi * t * std::sqrt(t - 1.0));
}

double truncated_hitting_cdf(double t)
{
    if (std::isnan(t)) {
        throw DomainError("truncated_hitting_cdf: NaN argument");
    }
    if (t <= 1.0) {
        return 0.0;
    }
    return 2.0 * std::atan(std::sqrt(t - 1.0)) / kPi;
}

double bm_covariance(double s, double t)
{
    if (!(s >= 0.0) || !(t >= 0.0)) {
        throw DomainError("bm_covariance: times must be nonnegative");
    }
    return std::min(s, t);
}

double bridge_covariance(double s, double t)
{
    if (!(s >= 0.0 && s <= 1.0) || !(t >= 0.0 && t <= 1.0)) {
        throw DomainError("bridge_covariance: times must lie in [0, 1]");
    }
    return std::min(s, t) - s * t;
}

double KlEigenpair::operator()(double t) const
{
    return std::numbers::sqrt2 * std::sin((static_cast<double>(index) - 0.5) * kPi * t);
}

KlEigenpair kl_eigenpair(std::int64_t j)
{
    if (j < 1) {
        throw DomainError("kl_eigenpair: index must be >= 1");
    }
    const double odd = 2.0 * static_cast<double>(j) - 1.0;
    return KlEigenpair{j, 4.0 / (odd * odd * kPi * kPi)};
}

double levy_modulus(double delta)
{
    if (!(delta > 0.0 && delta < 1.0)) {
        throw DomainError("levy_modulus: delta outside (0, 1)");
    }
    return std::sqrt(2.0 * delta * std::log(1.0 / delta));
}

const std::vector<LawInfo>& law_catalog()
{
    static const std::vector<LawInfo> catalog = {
        {"normal_cdf", {"x"}},
        {"max_cdf_complement", {"a", "t"}},
        {"reflection_joint_prob", {"a", "b", "t"}},
        {"hitting_cdf", {"a", "T"}},
        {"hitting_density", {"a", "T"}},
        {"arcsine_cdf", {"s"}},
        {"truncated_hitting_density", {"t"}},
        {"truncated_hitting_cdf", {"t"}},
        {"bm_covariance", {"s", "t"}},
        {"bridge_covariance", {"s", "t"}},
        {"kl_eigenvalue", {"j"}},
        {"kl_eigenfunction", {"j", "t"}},
        {"levy_modulus", {"delta"}},
    };
    return catalog;
}

LawEval evaluate_law(std::string_view name, const Params& params)
{
    const auto p = [&](std::string_view key) { return param(params, name, key); };
    const auto index = [&](std::string_view key) {
        const double j = p(key);
        if (j != std::floor(j)) {
            throw DomainError("law '" + std::string(name) + "': " + std::string(key) + " must be an integer");
        }
        return static_cast<std::int64_t>(j);
    };

    double value = 0.0;
    if (name == "normal_cdf") {
        value = normal_cdf(p("x"));
    } else if (name == "max_cdf_complement") {
        value = max_cdf_complement(p("a"), p("t"));
    } else if (name == "reflection_joint_prob") {
        value = reflection_joint_prob(p("a"), p("b"), p("t"));
    } else if (name == "hitting_cdf") {
        value = hitting_cdf(p("a"), p("T"));
    } else if (name == "hitting_density") {
        value = hitting_density(p("a"), p("T"));
    } else if (name == "arcsine_cdf") {
        value = arcsine_cdf(p("s"));
    } else if (name == "truncated_hitting_density") {
        value = truncated_hitting_density(p("t"));
    } else if (name == "truncated_hitting_cdf") {
        value = truncated_hitting_cdf(p("t"));
    } else if (name == "bm_covariance") {
        value = bm_covariance(p("s"), p("t"));
    } else if (name == "bridge_covariance") {
        value = bridge_covariance(p("s"), p("t"));
    } else if (name == "kl_eigenvalue") {
        value = kl_eigenpair(index("j")).eigenvalue;
    } else if (name == "kl_eigenfunction") {
        value = kl_eigenpair(index("j"))(p("t"));
    } else if (name == "levy_modulus") {
        value = levy_modulus(p("delta"));
    } else {
        throw ConfigError("unknown law '" + std::string(name) + "'");
    }
    return LawEval{std::string(name), params, value};
}

Cdf distribution_cdf(std::string_view name, const Params& params)
{
    const auto p = [&](std::string_view key) { return param(params, name, key); };
    if (name == "normal") {
        const double mean = params.contains("mean") ? p("mean") : 0.0;
        const double variance = params.contains("variance") ? p("variance") : 1.0;
        if (!(variance > 0.0)) {
            throw DomainError("normal: variance must be positive");
        }
        const double sd = std::sqrt(variance);
        return [mean, sd](double x) { return normal_cdf((x - mean) / sd); };
    }
    if (name == "uniform") {
        return [](double x) { return std::clamp(x, 0.0, 1.0); };
    }
    if (name == "running_max") {
        const double t = p("t");
        if (!(t > 0.0)) {
            throw DomainError("running_max: t must be positive");
        }
        return [t](double x) { return x > 0.0 ? 1.0 - max_cdf_complement(x, t) : 0.0; };
    }
    if (name == "hitting_time") {
        const double a = p("a");
        if (!(a > 0.0)) {
            throw DomainError("hitting_time: a must be positive");
        }
        return [a](double x) { return x > 0.0 ? hitting_cdf(a, x) : 0.0; };
    }
    if (name == "arcsine") {
        return [](double x) { return arcsine_cdf(std::clamp(x, 0.0, 1.0)); };
    }
    if (name == "truncated_hitting") {
        return [](double x) { return truncated_hitting_cdf(x); };
    }
    throw ConfigError("unknown distribution '" + std::string(name) + "'");
}

}  // namespace bmsim::laws
