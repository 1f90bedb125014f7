// One-off calibration run for the acceptance thresholds that depend on
// finite-size behaviour. Uses seeds disjoint from the acceptance suite and
// writes calibration.json.
//
//   bmsim_calibrate OUT_DIR [--workers W]

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "bmsim/ensemble.hpp"
#include "bmsim/functionals.hpp"
#include "bmsim/laws.hpp"
#include "bmsim/stats.hpp"
#include "json.hpp"

namespace {

using Json = nlohmann::ordered_json;
using bmsim::Path;

constexpr std::uint64_t kSeedBase = 0xCA11B000ULL;

bmsim::GeneratorSpec bm(std::size_t steps)
{
    bmsim::GeneratorSpec spec;
    spec.grid = bmsim::TimeGrid(1.0, steps);
    return spec;
}

double quantile(std::vector<double> v, double q)
{
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

Json quantiles(const std::vector<double>& v)
{
    Json q;
    for (const double p : {0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99}) {
        char key[16];
        std::snprintf(key, sizeof key, "%g", p);
        q[key] = quantile(v, p);
    }
    return q;
}

double fraction(const std::vector<double>& v, auto predicate)
{
    return static_cast<double>(std::count_if(v.begin(), v.end(), predicate)) / static_cast<double>(v.size());
}

}  // namespace

int main(int argc, char** argv)
{
    if (argc < 2) {
        std::cerr << "usage: bmsim_calibrate OUT_DIR [--workers W]\n";
        return 2;
    }
    const std::string out_dir = argv[1];
    unsigned workers = 1;
    if (argc == 4 && std::string(argv[2]) == "--workers") {
        workers = static_cast<unsigned>(std::max(1, std::atoi(argv[3])));
    }
    Json record;
    record["seed_base"] = kSeedBase;

    // Modulus statistic, n = 2^20, delta = 2^-14.
    {
        constexpr std::size_t count = 400;
        const auto m = bmsim::map_paths<double>(bmsim::PathGenerator(bm(1u << 20)), kSeedBase + 11, count, workers,
                                                [](std::size_t, const Path& p) {
                                                    return bmsim::modulus_statistic(p, 0x1p-14);
                                                });
        const double in_band = fraction(m, [](double x) { return x >= 0.8 && x <= 1.15; });
        // P(at least 18 of 20 in band) under Binomial(20, in_band).
        double pass = 0.0;
        for (int k = 18; k <= 20; ++k) {
            pass += std::tgamma(21.0) / (std::tgamma(k + 1.0) * std::tgamma(21.0 - k)) * std::pow(in_band, k) *
                    std::pow(1.0 - in_band, 20 - k);
        }
        record["modulus"] = Json{{"paths", count},
                                 {"steps", 1u << 20},
                                 {"delta", 0x1p-14},
                                 {"quantiles", quantiles(m)},
                                 {"fraction_in_0.8_1.15", in_band},
                                 {"p_at_least_18_of_20", pass}};
        std::cerr << "modulus done\n";
    }

    // Roughness statistic, n = 2^16.
    {
        constexpr std::size_t count = 5000;
        const auto r = bmsim::map_paths<double>(bmsim::PathGenerator(bm(1u << 16)), kSeedBase + 12, count, workers,
                                                [](std::size_t, const Path& p) { return bmsim::roughness_statistic(p); });
        record["roughness"] = Json{{"paths", count},
                                   {"steps", 1u << 16},
                                   {"quantiles", quantiles(r)},
                                   {"max", *std::max_element(r.begin(), r.end())},
                                   {"fraction_above_50", fraction(r, [](double x) { return x > 50.0; })}};
        std::cerr << "roughness done\n";
    }

    // Donsker coin walk: KS distance of Z_n(1) to Phi over many seeds.
    {
        constexpr int seeds = 60;
        std::vector<double> coin;
        std::vector<double> normal;
        for (const auto law : {bmsim::IncrementLaw::kCoin, bmsim::IncrementLaw::kNormal}) {
            auto spec = bm(1);
            spec.kind = bmsim::GeneratorKind::kDonskerPartialSum;
            spec.donsker_n = 1024;
            spec.increment_law = law;
            const bmsim::PathGenerator generator(spec);
            for (int s = 0; s < seeds; ++s) {
                const auto z = bmsim::map_paths<double>(generator, kSeedBase + 1000 + s, 50000, workers,
                                                        [](std::size_t, const Path& p) { return p[1]; });
                const double d = bmsim::stats::ks_statistic(z, [](double x) { return bmsim::laws::normal_cdf(x); });
                (law == bmsim::IncrementLaw::kCoin ? coin : normal).push_back(d);
            }
        }
        // Half of the central atom P(S_1024 = 0) = C(1024, 512) / 2^1024.
        const double atom = std::exp(std::lgamma(1025.0) - 2.0 * std::lgamma(513.0) - 1024.0 * std::log(2.0));
        record["donsker"] = Json{{"seeds", seeds},
                                 {"replications", 50000},
                                 {"n", 1024},
                                 {"half_central_atom", atom / 2.0},
                                 {"coin_quantiles", quantiles(coin)},
                                 {"coin_fraction_below_0.015", fraction(coin, [](double d) { return d < 0.015; })},
                                 {"normal_quantiles", quantiles(normal)},
                                 {"normal_fraction_below_0.015", fraction(normal, [](double d) { return d < 0.015; })}};
        std::cerr << "donsker done\n";
    }

    // Local time: Tanaka against occupation for several epsilon, n = 2^16.
    {
        constexpr std::size_t count = 1000;
        const std::vector<double> eps{0x1p-4, 0x1p-6, 0x1p-8, 0x1p-10};
        std::vector<std::vector<double>> gaps(eps.size(), std::vector<double>(count));
        bmsim::for_each_path(bmsim::PathGenerator(bm(1u << 16)), kSeedBase + 13, count, workers,
                             [&](std::size_t i, const Path& p) {
                                 const double tanaka = bmsim::local_time_tanaka(p, 0.0, 1.0).value;
                                 for (std::size_t e = 0; e < eps.size(); ++e) {
                                     gaps[e][i] = std::abs(tanaka - bmsim::local_time_occupation(p, 0.0, 1.0, eps[e]).value);
                                 }
                             });
        Json by_eps = Json::array();
        for (std::size_t e = 0; e < eps.size(); ++e) {
            const auto mean = bmsim::stats::mc_mean(gaps[e]);
            by_eps.push_back(Json{{"epsilon", eps[e]}, {"mean_abs_gap", mean.estimate}, {"halfwidth_95", mean.halfwidth_95}});
        }
        record["local_time"] = Json{{"paths", count}, {"steps", 1u << 16}, {"by_epsilon", by_eps}};
        std::cerr << "local time done\n";
    }

    // KS harness: rejections of 200 uniform samples at alpha = 0.05, for 50 seed blocks.
    {
        std::vector<double> counts;
        std::vector<double> sample(10000);
        const auto identity = bmsim::laws::distribution_cdf("uniform", {});
        for (int block = 0; block < 50; ++block) {
            int rejected = 0;
            for (int s = 0; s < 200; ++s) {
                bmsim::UniformStream u({kSeedBase + 100000 + block * 1000 + s, 0});
                for (auto& x : sample) {
                    x = u();
                }
                rejected += bmsim::stats::ks_test(sample, identity, 0.05).passed ? 0 : 1;
            }
            counts.push_back(rejected);
        }
        record["ks_harness"] = Json{{"blocks", 50},
                                    {"seeds_per_block", 200},
                                    {"rejection_quantiles", quantiles(counts)},
                                    {"fraction_in_4_16", fraction(counts, [](double c) { return c >= 4 && c <= 16; })}};
        std::cerr << "ks harness done\n";
    }

    std::ofstream(out_dir + "/calibration.json", std::ios::binary) << record.dump(2) << '\n';
    std::cout << record.dump(2) << '\n';
    return 0;
}
