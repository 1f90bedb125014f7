#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "bmsim/generators.hpp"
#include "bmsim/laws.hpp"
#include "bmsim/stats.hpp"

namespace bmsim {

inline constexpr int kConfigSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Functionals by name.

/// One functional evaluated on every path. `id` names the column that tests refer to.
struct FunctionalRequest {
    std::string id;
    std::string name;
    laws::Params params;
};

struct FunctionalInfo {
    std::string_view name;
    std::vector<std::string_view> params;
    bool censorable;  // may return no value (hitting times, last zero)
};

const std::vector<FunctionalInfo>& functional_catalog();

/// Throws ConfigError for an unknown name or a missing/extra parameter.
void validate_functional(const FunctionalRequest& request);

/// nullopt means CENSORED. sign_change_by is reported as 1 or 0.
std::optional<double> evaluate_functional(const FunctionalRequest& request, const Path& path);

/// "a=1;t=0.5" with parameters in name order and 17 significant digits.
std::string format_params(const laws::Params& params);

// ---------------------------------------------------------------------------
// Tests.

/// Either a literal or a named law evaluated with evaluate_law.
struct Target {
    std::variant<double, laws::LawEval> value;
    [[nodiscard]] double resolve() const;
};

/// |x - center| op value when `center` is set, otherwise x op value. CENSORED never matches.
struct Event {
    std::string functional;
    std::string op;  // one of < <= > >=
    double value = 0.0;
    std::optional<double> center;
};

enum class TestKind { kKs, kProbability, kMean, kVariance, kCovariance };

std::string_view to_string(TestKind kind) noexcept;

struct TestRequest {
    std::string name;
    TestKind kind = TestKind::kMean;
    std::string functional;           // ks, mean, variance, first of covariance
    std::string second_functional;    // covariance, or subtracted in mean
    bool absolute = false;            // mean of |x - y| (or |x|)
    std::vector<Event> events;        // probability: conjunction
    std::string distribution;         // ks
    laws::Params distribution_params;  // ks
    double alpha = 0.05;              // ks
    std::optional<Target> target;     // probability, mean, variance, covariance
    double tolerance = 0.0;
};

struct ExperimentConfig {
    int schema_version = kConfigSchemaVersion;
    std::string experiment_name;
    GeneratorSpec generator;
    std::size_t replications = 1;
    std::uint64_t master_seed = 0;
    std::vector<FunctionalRequest> functionals;
    std::vector<TestRequest> tests;
    std::string output_dir = "out";

    /// Checks names and cross-references; throws ConfigError naming the offending key.
    void validate() const;
};

/// Strict parsing: unknown keys, wrong types and unknown names raise ConfigError.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& file);
/// The "generator" object of a config on its own.
GeneratorSpec parse_generator_spec(std::string_view json_text);

/// Canonical JSON (sorted keys, no whitespace) of the generator spec and of the config.
std::string to_json(const GeneratorSpec& spec);
std::string to_json(const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Running.

struct RunOptions {
    unsigned workers = 1;
    /// Number of leading paths written as paths/path_NNNNNN.csv (simulate writes them, verify does not).
    std::size_t paths_to_write = 0;
    bool write_functionals = true;
};

struct ExperimentResult {
    std::vector<stats::TestReport> reports;
    [[nodiscard]] bool all_passed() const noexcept;
};

/// Evaluates every functional on every replication and runs the tests, writing
///   manifest.json, functionals.csv, reports.jsonl and summary.csv
/// into `output_dir`. Report files are flushed after each test. Output is a
/// pure function of the config; the worker count only changes speed.
ExperimentResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& output_dir,
                                const RunOptions& options = {});

/// Same computation without touching the filesystem.
ExperimentResult run_experiment_in_memory(const ExperimentConfig& config, unsigned workers = 1);

std::string report_to_json(const stats::TestReport& report);
void write_summary_header(std::ostream& out);
void write_summary_row(std::ostream& out, const stats::TestReport& report);

// ---------------------------------------------------------------------------
// Law tables.

/// Parameter axes in column order; rows are the Cartesian product, first axis outermost.
using LawGrid = std::vector<std::pair<std::string, std::vector<double>>>;

/// "s=0:1:5" (5 evenly spaced points, ends included), "s=0,0.25,0.5", or "s=" (empty);
/// several axes separated by ';'.
LawGrid parse_law_grid(std::string_view text);

/// Rows of (param..., value). Everything is evaluated before anything is written, so an
/// invalid law or a domain error leaves no file behind. Missing parent directories are created.
void emit_law_table(std::string_view law, const LawGrid& grid, const std::filesystem::path& file);
void write_law_table(std::ostream& out, std::string_view law, const LawGrid& grid);

}  // namespace bmsim
