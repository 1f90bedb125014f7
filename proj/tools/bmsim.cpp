// bmsim: batch driver for path simulation, verification runs, law tables and
// the acceptance suite. Seeds are always given on the command line.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bmsim/acceptance.hpp"
#include "bmsim/error.hpp"
#include "bmsim/experiment.hpp"

namespace {

constexpr int kExitFailedTests = 1;
constexpr int kExitError = 2;

void print_reports(const bmsim::ExperimentResult& result)
{
    for (const auto& r : result.reports) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.test_name << " statistic=" << r.statistic
                  << " threshold=" << r.threshold << '\n';
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Brownian motion path simulation and Monte Carlo verification"};
    app.require_subcommand(1);

    std::string config_file;
    std::uint64_t seed = 0;
    std::string out;
    unsigned workers = 1;
    std::size_t paths_to_write = 0;
    bool write_all_paths = true;

    auto* simulate = app.add_subcommand("simulate", "generate an ensemble and write paths and functionals as CSV");
    simulate->add_option("--config", config_file, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    simulate->add_option("--seed", seed, "master seed")->required();
    simulate->add_option("--out", out, "output directory")->required();
    simulate->add_option("--workers", workers, "worker threads (does not change results)")->check(CLI::PositiveNumber);
    simulate->add_option("--paths", paths_to_write, "write only the first N paths (default: all)")
        ->each([&](const std::string&) { write_all_paths = false; });

    auto* verify = app.add_subcommand("verify", "run the config's statistical tests; exit 0 iff all pass");
    verify->add_option("--config", config_file, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    verify->add_option("--seed", seed, "master seed")->required();
    verify->add_option("--out", out, "output directory (default: the config's output_dir)");
    verify->add_option("--workers", workers, "worker threads (does not change results)")->check(CLI::PositiveNumber);

    std::string law;
    std::string grid;
    auto* laws = app.add_subcommand("laws", "tabulate an analytic law over a parameter grid");
    laws->add_option("--law", law, "law name")->required();
    laws->add_option("--grid", grid, "e.g. 's=0:1:5' or 'a=1;t=0.5,1,2'")->required();
    laws->add_option("--out", out, "output CSV file")->required();

    std::vector<std::string> only;
    auto* acceptance = app.add_subcommand("acceptance", "run the acceptance suite");
    acceptance->add_option("--out", out, "output directory")->required();
    acceptance->add_option("--workers", workers, "worker threads (does not change results)")
        ->check(CLI::PositiveNumber);
    acceptance->add_option("--only", only, "run only these criteria, e.g. AC-3");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            auto config = bmsim::load_config(config_file);
            config.master_seed = seed;
            bmsim::RunOptions options;
            options.workers = workers;
            options.paths_to_write = write_all_paths ? config.replications : paths_to_write;
            const auto result = bmsim::run_experiment(config, out, options);
            print_reports(result);
            return 0;
        }
        if (verify->parsed()) {
            auto config = bmsim::load_config(config_file);
            config.master_seed = seed;
            bmsim::RunOptions options;
            options.workers = workers;
            const auto result = bmsim::run_experiment(config, out.empty() ? config.output_dir : out, options);
            print_reports(result);
            return result.all_passed() ? 0 : kExitFailedTests;
        }
        if (laws->parsed()) {
            bmsim::emit_law_table(law, bmsim::parse_law_grid(grid), out);
            return 0;
        }
        bmsim::acceptance::Options options;
        options.workers = workers;
        options.only = only;
        options.output_dir = out;
        options.on_outcome = [](const bmsim::acceptance::Outcome& o) { std::cout << o.summary_line() << std::endl; };
        const auto outcomes = bmsim::acceptance::run(options);
        bool all = true;
        for (const auto& o : outcomes) {
            all = all && o.passed();
        }
        return all ? 0 : kExitFailedTests;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
}
