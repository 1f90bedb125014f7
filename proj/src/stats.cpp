#include "bmsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bmsim/error.hpp"
#include "bmsim/format.hpp"

namespace bmsim::stats {

namespace {

constexpr std::size_t kMinKsSample = 50;

double ks_sorted(std::span<const double> sorted, const laws::Cdf& cdf)
{
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        const double upper = static_cast<double>(i + 1) / n - f;
        const double lower = f - static_cast<double>(i) / n;
        d = std::max({d, upper, lower});
    }
    return d;
}

double mean_of(std::span<const double> x)
{
    double sum = 0.0;
    for (const double v : x) {
        sum += v;
    }
    return sum / static_cast<double>(x.size());
}

}  // namespace

Ecdf::Ecdf(std::vector<double> sample) : sorted_(std::move(sample))
{
    if (sorted_.empty()) {
        throw DomainError("ecdf: empty sample");
    }
    std::sort(sorted_.begin(), sorted_.end());
}

double Ecdf::operator()(double t) const noexcept
{
    const auto below = std::upper_bound(sorted_.begin(), sorted_.end(), t) - sorted_.begin();
    return static_cast<double>(below) / static_cast<double>(sorted_.size());
}

Ecdf ecdf(std::span<const double> sample) { return Ecdf(std::vector<double>(sample.begin(), sample.end())); }

double ks_statistic(std::span<const double> sample, const laws::Cdf& cdf)
{
    if (sample.empty()) {
        throw DomainError("ks_statistic: empty sample");
    }
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    return ks_sorted(sorted, cdf);
}

double ks_two_sample(std::span<const double> a, std::span<const double> b)
{
    if (a.empty() || b.empty()) {
        throw DomainError("ks_two_sample: empty sample");
    }
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double t = std::min(x[i], y[j]);
        while (i < x.size() && x[i] <= t) {
            ++i;
        }
        while (j < y.size() && y[j] <= t) {
            ++j;
        }
        d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
    }
    return d;
}

double ks_critical_value(double alpha)
{
    if (alpha == 0.05) {
        return 1.358;
    }
    if (alpha == 0.01) {
        return 1.628;
    }
    throw DomainError("ks_test: alpha must be 0.05 or 0.01");
}

TestReport ks_test(std::span<const double> sample, const laws::Cdf& cdf, double alpha, std::string test_name)
{
    const double c = ks_critical_value(alpha);
    if (sample.size() < kMinKsSample) {
        throw DomainError("ks_test: asymptotic threshold needs n >= 50");
    }
    TestReport report;
    report.test_name = std::move(test_name);
    report.kind = "ks";
    report.sample_size = sample.size();
    report.statistic = ks_statistic(sample, cdf);
    report.threshold = c / std::sqrt(static_cast<double>(sample.size()));
    report.passed = report.statistic <= report.threshold;
    return report;
}

TestReport ks_test_censored(std::span<const std::optional<double>> sample, const laws::Cdf& cdf, double horizon,
                            double alpha, std::string test_name)
{
    std::vector<double> observed;
    observed.reserve(sample.size());
    for (const auto& value : sample) {
        if (value) {
            observed.push_back(*value);
        }
    }
    const double mass = cdf(horizon);
    if (!(mass > 0.0)) {
        throw DomainError("ks_test_censored: law puts no mass before the horizon");
    }
    const laws::Cdf renormalized = [&cdf, mass, horizon](double x) { return cdf(std::min(x, horizon)) / mass; };
    TestReport report = ks_test(observed, renormalized, alpha, std::move(test_name));
    const double rate = sample.empty() ? 0.0
                                       : static_cast<double>(sample.size() - observed.size()) /
                                             static_cast<double>(sample.size());
    report.notes = "censoring_rate=" + format_double(rate) + ";expected_censoring_rate=" + format_double(1.0 - mass);
    return report;
}

TestReport tolerance_test(std::string test_name, double estimate, double target, double tolerance,
                          std::size_t sample_size)
{
    TestReport report;
    report.test_name = std::move(test_name);
    report.kind = "tolerance";
    report.sample_size = sample_size;
    report.statistic = std::abs(estimate - target);
    report.threshold = tolerance;
    report.passed = report.statistic <= tolerance;
    report.estimate = estimate;
    report.target = target;
    return report;
}

MeanEstimate mc_mean(std::span<const double> sample)
{
    if (sample.size() < 2) {
        throw DomainError("mc_mean: needs at least 2 values");
    }
    const double mean = mean_of(sample);
    const double sd = std::sqrt(sample_variance(sample));
    return MeanEstimate{mean, 1.96 * sd / std::sqrt(static_cast<double>(sample.size()))};
}

double sample_variance(std::span<const double> sample) { return sample_covariance(sample, sample); }

double sample_covariance(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size()) {
        throw DomainError("sample_covariance: size mismatch");
    }
    if (x.size() < 2) {
        throw DomainError("sample_covariance: needs at least 2 values");
    }
    const double mx = mean_of(x);
    const double my = mean_of(y);
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sum += (x[i] - mx) * (y[i] - my);
    }
    return sum / static_cast<double>(x.size() - 1);
}

double sample_correlation(std::span<const double> x, std::span<const double> y)
{
    return sample_covariance(x, y) / std::sqrt(sample_variance(x) * sample_variance(y));
}

}  // namespace bmsim::stats
