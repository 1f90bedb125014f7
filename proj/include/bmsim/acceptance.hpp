#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bmsim/experiment.hpp"
#include "bmsim/stats.hpp"

namespace bmsim::acceptance {

/// Outcome of one acceptance criterion; it passes iff every check passes.
struct Outcome {
    std::string id;     // "AC-1" ...
    std::string title;
    std::vector<stats::TestReport> checks;
    double seconds = 0.0;

    [[nodiscard]] bool passed() const noexcept;
    /// One line: id, PASS/FAIL, title and the per-check statistics.
    [[nodiscard]] std::string summary_line() const;
};

struct Options {
    unsigned workers = 1;
    std::vector<std::string> only;  // empty: all criteria
    /// When set, reports.jsonl, summary.csv and acceptance.txt are written here.
    std::optional<std::filesystem::path> output_dir;
    std::function<void(const Outcome&)> on_outcome;  // called as each criterion finishes
};

struct Criterion {
    std::string id;
    std::string title;
};

const std::vector<Criterion>& criteria();

/// Experiment equivalent to the shipped configs/reflection.json (the AC-1/AC-2 ensemble).
ExperimentConfig reflection_config();

/// Master seed used by criterion `number` (1-based); fixed so runs are reproducible.
std::uint64_t criterion_seed(int number);

std::vector<Outcome> run(const Options& options);

}  // namespace bmsim::acceptance
