#include "bmsim/generators.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "bmsim/error.hpp"
#include "bmsim/laws.hpp"

namespace bmsim {

namespace {

void fill_exact(const TimeGrid& grid, double start, StreamKey key, std::vector<double>& out)
{
    out.resize(grid.size());
    GaussianStream gauss(key);
    const double sd = std::sqrt(grid.step());
    double acc = start;
    out[0] = start;
    for (std::size_t k = 1; k < out.size(); ++k) {
        acc += sd * gauss();
        out[k] = acc;
    }
}

void fill_dyadic(const TimeGrid& grid, double start, StreamKey key, unsigned level, std::vector<double>& out)
{
    const std::size_t n = grid.steps();
    out.resize(n + 1);
    const GaussianStream gauss(key);
    const double horizon = grid.horizon();
    out[0] = start;
    out[n] = start + std::sqrt(horizon) * gauss.at(0);
    for (unsigned m = 0; m < level; ++m) {
        const std::size_t count = std::size_t{1} << m;
        const std::size_t stride = n >> m;
        const std::size_t half = stride >> 1;
        const double span = horizon / static_cast<double>(count);
        for (std::size_t k = 0; k < count; ++k) {
            const std::size_t left = k * stride;
            out[left + half] = dyadic_midpoint(out[left], out[left + stride], span, gauss.at(count + k));
        }
    }
}

// Ascending-j Neumaier summation per grid point; basis(j, k) = sqrt(lambda_j) phi_j(t_k).
template <class Coefficient, class Basis>
void kl_accumulate(std::size_t points, std::size_t terms, double start, Coefficient coefficient, Basis basis,
                   std::vector<double>& out)
{
    out.assign(points, 0.0);
    std::vector<double> compensation(points, 0.0);
    for (std::size_t j = 1; j <= terms; ++j) {
        const double v = coefficient(j);
        for (std::size_t k = 0; k < points; ++k) {
            const double term = v * basis(j, k);
            const double sum = out[k] + term;
            if (std::abs(out[k]) >= std::abs(term)) {
                compensation[k] += (out[k] - sum) + term;
            } else {
                compensation[k] += (term - sum) + out[k];
            }
            out[k] = sum;
        }
    }
    for (std::size_t k = 0; k < points; ++k) {
        out[k] = start + (out[k] + compensation[k]);
    }
}

double kl_basis_value(std::size_t j, double t)
{
    const auto pair = laws::kl_eigenpair(static_cast<std::int64_t>(j));
    return std::sqrt(pair.eigenvalue) * pair(t);
}

// floor(n t) for a grid time; the slack absorbs rounding in k T / steps.
std::size_t partial_sum_index(std::size_t donsker_n, double t)
{
    return static_cast<std::size_t>(std::floor(static_cast<double>(donsker_n) * t + 1e-9));
}

template <class NextIncrement>
void fill_partial_sums(const TimeGrid& grid, std::size_t donsker_n, double start, NextIncrement next,
                       std::vector<double>& out)
{
    out.resize(grid.size());
    const double scale = std::sqrt(static_cast<double>(donsker_n));
    double sum = 0.0;
    std::size_t consumed = 0;
    for (std::size_t k = 0; k < out.size(); ++k) {
        const std::size_t target = partial_sum_index(donsker_n, grid.time(k));
        while (consumed < target) {
            sum += next(consumed);
            ++consumed;
        }
        out[k] = start + sum / scale;
    }
}

template <class NextSample>
void fill_empirical(const TimeGrid& grid, std::size_t sample_size, double start, NextSample next,
                    std::vector<double>& out)
{
    const std::size_t n = grid.steps();
    // counts[k] = #{X : t_{k-1} < X <= t_k}; prefix sums give #{X <= t_k}.
    std::vector<std::size_t> counts(n + 2, 0);
    for (std::size_t i = 0; i < sample_size; ++i) {
        const double x = next(i);
        if (!(x > 0.0 && x < 1.0)) {
            throw PreconditionError("empirical process: sample values must lie in (0, 1)");
        }
        auto k = static_cast<std::size_t>(std::ceil(x * static_cast<double>(n)));
        while (k > 0 && grid.time(k - 1) >= x) {
            --k;
        }
        while (k <= n && grid.time(k) < x) {
            ++k;
        }
        ++counts[k];
    }
    out.resize(n + 1);
    const double m = static_cast<double>(sample_size);
    const double root_m = std::sqrt(m);
    std::size_t below = 0;
    for (std::size_t k = 0; k <= n; ++k) {
        below += counts[k];
        out[k] = start + root_m * (static_cast<double>(below) / m - grid.time(k));
    }
}

void require_kind(const GeneratorSpec& spec, GeneratorKind kind, const char* op)
{
    if (spec.kind != kind) {
        throw SpecError(std::string(op) + ": spec kind is " + std::string(to_string(spec.kind)));
    }
}

bool is_unit_horizon(const TimeGrid& grid) { return grid.horizon() == 1.0; }

}  // namespace

std::string_view to_string(GeneratorKind kind) noexcept
{
    switch (kind) {
        case GeneratorKind::kExactIncrement: return "ExactIncrement";
        case GeneratorKind::kDyadicRefine: return "DyadicRefine";
        case GeneratorKind::kKarhunenLoeve: return "KarhunenLoeve";
        case GeneratorKind::kDonskerPartialSum: return "DonskerPartialSum";
        case GeneratorKind::kBrownianBridge: return "BrownianBridge";
        case GeneratorKind::kEmpiricalProcess: return "EmpiricalProcess";
    }
    return "unknown";
}

std::string_view to_string(IncrementLaw law) noexcept
{
    return law == IncrementLaw::kCoin ? "coin" : "normal";
}

GeneratorKind parse_generator_kind(std::string_view name)
{
    for (const auto kind : {GeneratorKind::kExactIncrement, GeneratorKind::kDyadicRefine,
                            GeneratorKind::kKarhunenLoeve, GeneratorKind::kDonskerPartialSum,
                            GeneratorKind::kBrownianBridge, GeneratorKind::kEmpiricalProcess}) {
        if (to_string(kind) == name) {
            return kind;
        }
    }
    throw ConfigError("unknown generator kind '" + std::string(name) + "'");
}

IncrementLaw parse_increment_law(std::string_view name)
{
    if (name == "coin") {
        return IncrementLaw::kCoin;
    }
    if (name == "normal") {
        return IncrementLaw::kNormal;
    }
    throw ConfigError("unknown increment law '" + std::string(name) + "'");
}

void GeneratorSpec::validate() const
{
    if (!std::isfinite(start_value)) {
        throw SpecError("start_value must be finite");
    }
    switch (kind) {
        case GeneratorKind::kExactIncrement:
            break;
        case GeneratorKind::kDyadicRefine:
            if (!std::has_single_bit(grid.steps())) {
                throw SpecError("DyadicRefine: steps must be a power of two");
            }
            break;
        case GeneratorKind::kKarhunenLoeve:
            if (!is_unit_horizon(grid)) {
                throw SpecError("KarhunenLoeve: horizon must be 1");
            }
            if (kl_terms == 0) {
                throw SpecError("KarhunenLoeve: kl_terms must be positive");
            }
            break;
        case GeneratorKind::kDonskerPartialSum:
            if (donsker_n == 0) {
                throw SpecError("DonskerPartialSum: donsker_n must be positive");
            }
            break;
        case GeneratorKind::kBrownianBridge:
            if (!is_unit_horizon(grid)) {
                throw SpecError("BrownianBridge: horizon must be 1");
            }
            break;
        case GeneratorKind::kEmpiricalProcess:
            if (!is_unit_horizon(grid)) {
                throw SpecError("EmpiricalProcess: horizon must be 1");
            }
            if (sample_size == 0) {
                throw SpecError("EmpiricalProcess: sample_size must be positive");
            }
            break;
    }
}

Path kl_series(const TimeGrid& grid, std::span<const double> coefficients, double start_value)
{
    if (!is_unit_horizon(grid)) {
        throw SpecError("kl_series: horizon must be 1");
    }
    std::vector<double> out;
    kl_accumulate(
        grid.size(), coefficients.size(), start_value, [&](std::size_t j) { return coefficients[j - 1]; },
        [&](std::size_t j, std::size_t k) { return kl_basis_value(j, grid.time(k)); }, out);
    return Path(grid, std::move(out));
}

Path donsker_partial_sums(const TimeGrid& grid, std::span<const double> increments, std::size_t donsker_n,
                          double start_value)
{
    if (donsker_n == 0) {
        throw SpecError("donsker_partial_sums: donsker_n must be positive");
    }
    if (increments.size() < partial_sum_index(donsker_n, grid.horizon())) {
        throw PreconditionError("donsker_partial_sums: not enough increments for the horizon");
    }
    std::vector<double> out;
    fill_partial_sums(grid, donsker_n, start_value, [&](std::size_t i) { return increments[i]; }, out);
    return Path(grid, std::move(out));
}

Path empirical_process_from_sample(const TimeGrid& grid, std::span<const double> sample, double start_value)
{
    if (!is_unit_horizon(grid)) {
        throw SpecError("empirical_process_from_sample: horizon must be 1");
    }
    if (sample.empty()) {
        throw PreconditionError("empirical_process_from_sample: empty sample");
    }
    std::vector<double> out;
    fill_empirical(grid, sample.size(), start_value, [&](std::size_t i) { return sample[i]; }, out);
    return Path(grid, std::move(out));
}

Path generate_exact(const GeneratorSpec& spec, StreamKey key)
{
    require_kind(spec, GeneratorKind::kExactIncrement, "generate_exact");
    return PathGenerator(spec)(key);
}

Path generate_dyadic(const GeneratorSpec& spec, StreamKey key, unsigned level)
{
    if (level >= 63 || spec.grid.steps() != (std::size_t{1} << level)) {
        throw SpecError("generate_dyadic: steps must equal 2^level");
    }
    if (!std::isfinite(spec.start_value)) {
        throw SpecError("start_value must be finite");
    }
    std::vector<double> out;
    fill_dyadic(spec.grid, spec.start_value, key, level, out);
    return Path(spec.grid, std::move(out));
}

Path generate_kl(const GeneratorSpec& spec, StreamKey key)
{
    require_kind(spec, GeneratorKind::kKarhunenLoeve, "generate_kl");
    return PathGenerator(spec)(key);
}

Path generate_donsker(const GeneratorSpec& spec, StreamKey key)
{
    require_kind(spec, GeneratorKind::kDonskerPartialSum, "generate_donsker");
    return PathGenerator(spec)(key);
}

Path generate_bridge(const GeneratorSpec& spec, StreamKey key)
{
    require_kind(spec, GeneratorKind::kBrownianBridge, "generate_bridge");
    return PathGenerator(spec)(key);
}

Path generate_empirical_process(const GeneratorSpec& spec, StreamKey key)
{
    require_kind(spec, GeneratorKind::kEmpiricalProcess, "generate_empirical_process");
    return PathGenerator(spec)(key);
}

Path generate(const GeneratorSpec& spec, StreamKey key) { return PathGenerator(spec)(key); }

// ---------------------------------------------------------------------------

struct PathGenerator::KlBasis {
    std::size_t terms = 0;
    std::size_t points = 0;
    std::vector<double> table;  // table[(j-1) * points + k] = sqrt(lambda_j) phi_j(t_k)
};

PathGenerator::PathGenerator(GeneratorSpec spec) : spec_(spec)
{
    spec_.validate();
    if (spec_.kind == GeneratorKind::kDyadicRefine) {
        dyadic_level_ = static_cast<unsigned>(std::countr_zero(spec_.grid.steps()));
    }
    if (spec_.kind == GeneratorKind::kKarhunenLoeve) {
        constexpr std::size_t kMaxTableEntries = std::size_t{1} << 26;
        const std::size_t points = spec_.grid.size();
        if (spec_.kl_terms * points <= kMaxTableEntries) {
            auto basis = std::make_unique<KlBasis>();
            basis->terms = spec_.kl_terms;
            basis->points = points;
            basis->table.resize(spec_.kl_terms * points);
            for (std::size_t j = 1; j <= spec_.kl_terms; ++j) {
                for (std::size_t k = 0; k < points; ++k) {
                    basis->table[(j - 1) * points + k] = kl_basis_value(j, spec_.grid.time(k));
                }
            }
            kl_basis_ = std::move(basis);
        }
    }
}

PathGenerator::~PathGenerator() = default;
PathGenerator::PathGenerator(PathGenerator&&) noexcept = default;
PathGenerator& PathGenerator::operator=(PathGenerator&&) noexcept = default;

Path PathGenerator::operator()(StreamKey key) const
{
    std::vector<double> values;
    fill(key, values);
    return Path(spec_.grid, std::move(values));
}

void PathGenerator::fill(StreamKey key, std::vector<double>& values) const
{
    const TimeGrid& grid = spec_.grid;
    const double start = spec_.start_value;
    switch (spec_.kind) {
        case GeneratorKind::kExactIncrement:
            fill_exact(grid, start, key, values);
            return;
        case GeneratorKind::kDyadicRefine:
            fill_dyadic(grid, start, key, dyadic_level_, values);
            return;
        case GeneratorKind::kKarhunenLoeve: {
            const GaussianStream gauss(key);
            const auto coefficient = [&](std::size_t j) { return gauss.at(j - 1); };
            if (kl_basis_) {
                const KlBasis& b = *kl_basis_;
                kl_accumulate(
                    b.points, b.terms, start, coefficient,
                    [&](std::size_t j, std::size_t k) { return b.table[(j - 1) * b.points + k]; }, values);
            } else {
                kl_accumulate(
                    grid.size(), spec_.kl_terms, start, coefficient,
                    [&](std::size_t j, std::size_t k) { return kl_basis_value(j, grid.time(k)); }, values);
            }
            return;
        }
        case GeneratorKind::kDonskerPartialSum:
            if (spec_.increment_law == IncrementLaw::kCoin) {
                const UniformStream coin(key);
                fill_partial_sums(
                    grid, spec_.donsker_n, start, [&](std::size_t i) { return coin.at(i) < 0.5 ? -1.0 : 1.0; },
                    values);
            } else {
                const GaussianStream gauss(key);
                fill_partial_sums(grid, spec_.donsker_n, start, [&](std::size_t i) { return gauss.at(i); },
                                  values);
            }
            return;
        case GeneratorKind::kBrownianBridge: {
            // Pinned at start_value at both ends: W = x + (B - x) - t (B(1) - x).
            fill_exact(grid, 0.0, key, values);
            const double end = values.back();
            for (std::size_t k = 0; k < values.size(); ++k) {
                values[k] = start + (values[k] - grid.time(k) * end);
            }
            return;
        }
        case GeneratorKind::kEmpiricalProcess: {
            const UniformStream uniform(key);
            fill_empirical(grid, spec_.sample_size, start, [&](std::size_t i) { return uniform.at(i); }, values);
            return;
        }
    }
}

}  // namespace bmsim
