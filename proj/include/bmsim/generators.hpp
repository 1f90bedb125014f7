#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bmsim/paths.hpp"
#include "bmsim/rng.hpp"

namespace bmsim {

enum class GeneratorKind {
    kExactIncrement,
    kDyadicRefine,
    kKarhunenLoeve,
    kDonskerPartialSum,
    kBrownianBridge,
    kEmpiricalProcess,
};

enum class IncrementLaw { kCoin, kNormal };

std::string_view to_string(GeneratorKind kind) noexcept;
std::string_view to_string(IncrementLaw law) noexcept;
/// Throws ConfigError on an unknown name.
GeneratorKind parse_generator_kind(std::string_view name);
IncrementLaw parse_increment_law(std::string_view name);

/// Which construction produces paths, on which grid, with its parameters.
/// Fields that do not apply to `kind` are ignored.
struct GeneratorSpec {
    GeneratorKind kind = GeneratorKind::kExactIncrement;
    TimeGrid grid{1.0, 1024};
    double start_value = 0.0;
    std::size_t kl_terms = 1000;                     // KarhunenLoeve
    std::size_t donsker_n = 1024;                    // DonskerPartialSum
    IncrementLaw increment_law = IncrementLaw::kCoin;  // DonskerPartialSum
    std::size_t sample_size = 1000;                  // EmpiricalProcess, uniform(0,1) base

    /// Throws SpecError when the parameters do not fit the construction.
    void validate() const;
};

// ---------------------------------------------------------------------------
// Deterministic kernels. The stream-driven generators below are thin wrappers
// that feed these with variates, which keeps them testable with fixed draws.

/// Conditional midpoint of a Brownian segment of length `span` with endpoint
/// values left/right: mean (left+right)/2, variance span/4.
inline double dyadic_midpoint(double left, double right, double span, double draw) noexcept
{
    return 0.5 * (left + right) + 0.5 * std::sqrt(span) * draw;
}

/// sum_{j<=J} sqrt(lambda_j) V_j phi_j(t_k) on a grid over [0, 1], with
/// coefficients[j-1] = V_j. Ascending-j compensated summation per point.
Path kl_series(const TimeGrid& grid, std::span<const double> coefficients, double start_value = 0.0);

/// Z(t_k) = S_[n t_k] / sqrt(n) for n = donsker_n; needs floor(n T) increments.
Path donsker_partial_sums(const TimeGrid& grid, std::span<const double> increments, std::size_t donsker_n,
                          double start_value = 0.0);

/// sqrt(m) (F_m(t_k) - t_k) for the ECDF F_m of a sample in (0, 1).
Path empirical_process_from_sample(const TimeGrid& grid, std::span<const double> sample,
                                   double start_value = 0.0);

// ---------------------------------------------------------------------------
// Stream-driven generators.
//
// Stream positions: ExactIncrement/BrownianBridge use Gaussian positions
// 0..n-1 for the increments. DyadicRefine uses Gaussian position 0 for the
// endpoint and [2^m, 2^{m+1}) for the midpoints inserted when refining level
// m to m+1. KarhunenLoeve uses Gaussian position j-1 for V_j. Donsker uses
// the uniform (coin) or Gaussian (normal) stream from 0; EmpiricalProcess uses
// uniform positions 0..m-1.

Path generate_exact(const GeneratorSpec& spec, StreamKey key);
Path generate_dyadic(const GeneratorSpec& spec, StreamKey key, unsigned level);
Path generate_kl(const GeneratorSpec& spec, StreamKey key);
Path generate_donsker(const GeneratorSpec& spec, StreamKey key);
Path generate_bridge(const GeneratorSpec& spec, StreamKey key);
Path generate_empirical_process(const GeneratorSpec& spec, StreamKey key);

/// Dispatch on spec.kind; DyadicRefine uses level log2(steps).
Path generate(const GeneratorSpec& spec, StreamKey key);

/// Reusable generator for ensembles: validates once, caches the KL basis, and
/// can refill a caller-owned buffer to avoid per-path allocation.
class PathGenerator {
  public:
    explicit PathGenerator(GeneratorSpec spec);
    ~PathGenerator();
    PathGenerator(PathGenerator&&) noexcept;
    PathGenerator& operator=(PathGenerator&&) noexcept;

    [[nodiscard]] const GeneratorSpec& spec() const noexcept { return spec_; }

    [[nodiscard]] Path operator()(StreamKey key) const;

    /// Writes the path values for `key` into `values` (resized to grid.size()).
    void fill(StreamKey key, std::vector<double>& values) const;

  private:
    struct KlBasis;
    GeneratorSpec spec_;
    unsigned dyadic_level_ = 0;
    std::unique_ptr<KlBasis> kl_basis_;
};

}  // namespace bmsim
