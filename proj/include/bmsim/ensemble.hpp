#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "bmsim/generators.hpp"

namespace bmsim {

/// Monte Carlo replication: path i is generate(spec, {master_seed, i}).
struct Ensemble {
    GeneratorSpec spec;
    std::uint64_t master_seed = 0;
    std::size_t count = 1;

    [[nodiscard]] StreamKey key(std::size_t index) const noexcept { return StreamKey{master_seed, index}; }
    [[nodiscard]] Path path(std::size_t index) const { return generate(spec, key(index)); }
};

/// Calls fn(index, path) for index in [0, count). With workers > 1 the index range
/// is split into contiguous chunks, one thread each; fn must then be safe to call
/// concurrently for distinct indices. Results never depend on `workers`.
template <class Fn>
void for_each_path(const PathGenerator& generator, std::uint64_t master_seed, std::size_t count,
                   unsigned workers, Fn&& fn)
{
    const auto run_range = [&](std::size_t begin, std::size_t end) {
        std::vector<double> buffer;
        for (std::size_t i = begin; i < end; ++i) {
            generator.fill(StreamKey{master_seed, i}, buffer);
            Path path(generator.spec().grid, std::move(buffer));
            fn(i, static_cast<const Path&>(path));
            buffer = std::move(path).into_values();
        }
    };

    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    if (workers == 1) {
        run_range(0, count);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = count * w / workers;
        const std::size_t end = count * (w + 1) / workers;
        threads.emplace_back([&, begin, end] {
            try {
                run_range(begin, end);
            } catch (...) {
                const std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        });
    }
    for (auto& thread : threads) {
        thread.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

/// results[i] = fn(i, path_i), ordered by path index.
template <class Result, class Fn>
std::vector<Result> map_paths(const PathGenerator& generator, std::uint64_t master_seed, std::size_t count,
                              unsigned workers, Fn&& fn)
{
    std::vector<Result> results(count);
    for_each_path(generator, master_seed, count, workers,
                  [&](std::size_t i, const Path& path) { results[i] = fn(i, path); });
    return results;
}

}  // namespace bmsim
