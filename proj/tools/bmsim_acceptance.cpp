// Acceptance suite runner used by ctest: one PASS/FAIL line per criterion,
// nonzero exit if any criterion fails.
//
//   bmsim_acceptance [--out DIR] [--workers W] [AC-n ...]

#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <string>
#include <thread>

#include "bmsim/acceptance.hpp"

int main(int argc, char** argv)
{
    bmsim::acceptance::Options options;
    options.workers = std::max(1u, std::thread::hardware_concurrency());
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--out" && i + 1 < argc) {
            options.output_dir = argv[++i];
        } else if (arg == "--workers" && i + 1 < argc) {
            options.workers = static_cast<unsigned>(std::max(1, std::atoi(argv[++i])));
        } else {
            options.only.push_back(arg);
        }
    }
    int failed = 0;
    options.on_outcome = [&](const bmsim::acceptance::Outcome& o) {
        failed += o.passed() ? 0 : 1;
        std::cout << o.summary_line() << "  (" << std::fixed << std::setprecision(1) << o.seconds << " s)"
                  << std::defaultfloat << std::endl;
    };
    try {
        const auto outcomes = bmsim::acceptance::run(options);
        std::cout << outcomes.size() - failed << " of " << outcomes.size() << " acceptance criteria passed\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return failed == 0 ? 0 : 1;
}
