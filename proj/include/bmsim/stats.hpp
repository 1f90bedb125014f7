#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bmsim/laws.hpp"

namespace bmsim::stats {

/// Outcome of one statistical verification. For KS tests `statistic` is D_n and
/// `threshold` the critical value; for tolerance tests `statistic` is
/// |estimate - target| and `threshold` the tolerance.
struct TestReport {
    std::string test_name;
    std::string kind;  // "ks" or "tolerance"
    std::size_t sample_size = 0;
    double statistic = 0.0;
    double threshold = 0.0;
    bool passed = false;
    std::uint64_t master_seed = 0;
    std::string generator_spec;  // JSON echo, may be empty
    std::string notes;
    std::optional<double> estimate;
    std::optional<double> target;
};

/// Right-continuous empirical CDF F_n(t) = #{x_i <= t} / n.
class Ecdf {
  public:
    /// Throws DomainError on an empty sample.
    explicit Ecdf(std::vector<double> sample);

    [[nodiscard]] double operator()(double t) const noexcept;
    [[nodiscard]] std::size_t size() const noexcept { return sorted_.size(); }
    [[nodiscard]] std::span<const double> sorted() const noexcept { return sorted_; }

  private:
    std::vector<double> sorted_;
};

Ecdf ecdf(std::span<const double> sample);

/// D_n = max_i max(i/n - F(x_(i)), F(x_(i)) - (i-1)/n).
double ks_statistic(std::span<const double> sample, const laws::Cdf& cdf);

/// Two-sample Kolmogorov-Smirnov distance sup |F_a - F_b|.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Asymptotic Kolmogorov critical value c(alpha) for alpha in {0.05, 0.01}.
double ks_critical_value(double alpha);

/// One-sample KS test with threshold c(alpha)/sqrt(n). Requires n >= 50.
TestReport ks_test(std::span<const double> sample, const laws::Cdf& cdf, double alpha,
                   std::string test_name = "ks_test");

/// KS test for a sample censored at `horizon` (nullopt = censored): the observed
/// values are compared with F(x)/F(horizon); the censoring rate goes into notes.
TestReport ks_test_censored(std::span<const std::optional<double>> sample, const laws::Cdf& cdf,
                            double horizon, double alpha, std::string test_name = "ks_test_censored");

/// passed = |estimate - target| <= tolerance.
TestReport tolerance_test(std::string test_name, double estimate, double target, double tolerance,
                          std::size_t sample_size);

struct MeanEstimate {
    double estimate = 0.0;
    double halfwidth_95 = 0.0;  // 1.96 s / sqrt(n)
};

/// Requires n >= 2.
MeanEstimate mc_mean(std::span<const double> sample);

/// Unbiased sample variance and covariance; require n >= 2.
double sample_variance(std::span<const double> sample);
double sample_covariance(std::span<const double> x, std::span<const double> y);
double sample_correlation(std::span<const double> x, std::span<const double> y);

}  // namespace bmsim::stats
