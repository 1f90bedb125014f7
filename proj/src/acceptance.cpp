#include "bmsim/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "bmsim/ensemble.hpp"
#include "bmsim/error.hpp"
#include "bmsim/format.hpp"
#include "bmsim/functionals.hpp"
#include "bmsim/laws.hpp"

namespace bmsim::acceptance {

namespace {

// Thresholds come straight from the acceptance criteria. The modulus band and the
// roughness threshold were checked against the calibration run recorded in
// calibration/calibration.md; see there for why the roughness bound fails.
constexpr double kModulusLow = 0.8;
constexpr double kModulusHigh = 1.15;
constexpr double kRoughnessThreshold = 50.0;

GeneratorSpec bm_spec(double horizon, std::size_t steps)
{
    GeneratorSpec spec;
    spec.grid = TimeGrid(horizon, steps);
    return spec;
}

stats::TestReport stamp(stats::TestReport report, std::uint64_t seed, const GeneratorSpec* spec)
{
    report.master_seed = seed;
    report.generator_spec = spec != nullptr ? to_json(*spec) : std::string();
    return report;
}

stats::TestReport in_band(std::string name, double estimate, double lo, double hi, std::size_t n)
{
    auto report = stats::tolerance_test(std::move(name), estimate, 0.5 * (lo + hi), 0.5 * (hi - lo), n);
    // Decide membership on the band itself, not on the rounded midpoint form.
    report.passed = estimate >= lo && estimate <= hi;
    report.notes = "band=[" + format_double(lo) + "," + format_double(hi) + "]";
    return report;
}

/// passed = estimate < bound.
stats::TestReport below(std::string name, double estimate, double bound, std::size_t n)
{
    stats::TestReport r;
    r.test_name = std::move(name);
    r.kind = "upper_bound";
    r.sample_size = n;
    r.statistic = estimate;
    r.threshold = bound;
    r.passed = estimate < bound;
    r.estimate = estimate;
    return r;
}

/// passed = estimate >= bound.
stats::TestReport at_least(std::string name, double estimate, double bound, std::size_t n)
{
    stats::TestReport r;
    r.test_name = std::move(name);
    r.kind = "lower_bound";
    r.sample_size = n;
    r.statistic = estimate;
    r.threshold = bound;
    r.passed = estimate >= bound;
    r.estimate = estimate;
    return r;
}

/// KS distance with a fixed acceptance threshold instead of c(alpha)/sqrt(n).
stats::TestReport ks_fixed(stats::TestReport ks, double bound)
{
    const double asymptotic = ks.threshold;
    ks.threshold = bound;
    ks.passed = ks.statistic < bound;
    ks.notes += (ks.notes.empty() ? "" : ";") + std::string("asymptotic_threshold=") + format_double(asymptotic);
    return ks;
}

template <class Result, class Fn>
std::vector<Result> ensemble(const GeneratorSpec& spec, std::uint64_t seed, std::size_t count, unsigned workers,
                             Fn&& fn)
{
    return map_paths<Result>(PathGenerator(spec), seed, count, workers, std::forward<Fn>(fn));
}

class Runner {
  public:
    explicit Runner(unsigned workers) : workers_(workers) {}

    std::vector<stats::TestReport> run(int number)
    {
        switch (number) {
            case 1: return {reflection().reports.at(0)};
            case 2: return {reflection().reports.at(1)};
            case 3: return hitting_time();
            case 4: return arcsine();
            case 5: return karhunen_loeve();
            case 6: return dyadic_nesting();
            case 7: return quadratic_variation_check();
            case 8: return donsker();
            case 9: return empirical_process();
            case 10: return local_time();
            case 11: return roughness_and_modulus();
            case 12: return sign_change();
            case 13: return truncated_hitting();
            case 14: return harness_calibration();
            default: throw ConfigError("no acceptance criterion " + std::to_string(number));
        }
    }

  private:
    const ExperimentResult& reflection()
    {
        if (!reflection_) {
            reflection_ = run_experiment_in_memory(reflection_config(), workers_);
            for (auto& r : reflection_->reports) {
                r.test_name = (r.test_name == "max_tail" ? "AC-1/" : "AC-2/") + r.test_name;
            }
        }
        return *reflection_;
    }

    std::vector<stats::TestReport> hitting_time()
    {
        const auto seed = criterion_seed(3);
        const auto spec = bm_spec(4.0, 1u << 16);
        const auto taus = ensemble<std::optional<double>>(
            spec, seed, 100000, workers_, [](std::size_t, const Path& p) { return first_hitting_time(p, 1.0).time; });
        const auto cdf = laws::distribution_cdf("hitting_time", {{"a", 1.0}});
        auto ks = stats::ks_test_censored(taus, cdf, 4.0, 0.01, "AC-3/hitting_time_ks");
        return {stamp(ks_fixed(std::move(ks), 0.02), seed, &spec)};
    }

    std::vector<stats::TestReport> arcsine()
    {
        const auto seed = criterion_seed(4);
        const auto spec = bm_spec(1.0, 1u << 16);
        const auto zeros = ensemble<double>(spec, seed, 100000, workers_, [](std::size_t, const Path& p) {
            return last_zero_before(p, 1.0).value();  // the path starts at 0, so a zero always exists
        });
        const stats::Ecdf f(zeros);
        std::vector<stats::TestReport> out;
        for (const double s : {0.25, 0.5, 0.75}) {
            out.push_back(stamp(stats::tolerance_test("AC-4/arcsine_cdf_s=" + format_double(s), f(s),
                                                      laws::arcsine_cdf(s), 0.01, zeros.size()),
                                seed, &spec));
        }
        return out;
    }

    std::vector<stats::TestReport> karhunen_loeve()
    {
        const auto seed = criterion_seed(5);
        GeneratorSpec spec = bm_spec(1.0, 10);
        spec.kind = GeneratorKind::kKarhunenLoeve;
        spec.kl_terms = 2000;
        constexpr std::size_t n = 50000;
        std::vector<double> w3(n), w5(n), w7(n);
        for_each_path(PathGenerator(spec), seed, n, workers_, [&](std::size_t i, const Path& p) {
            w3[i] = p[3];
            w5[i] = p[5];
            w7[i] = p[7];
        });
        long double trace = 0.0L;
        for (std::int64_t j = 1000000; j >= 1; --j) {
            trace += laws::kl_eigenpair(j).eigenvalue;
        }
        return {
            stamp(in_band("AC-5/variance_w0.5", stats::sample_variance(w5), 0.485, 0.515, n), seed, &spec),
            stamp(in_band("AC-5/covariance_w0.3_w0.7", stats::sample_covariance(w3, w7), 0.285, 0.315, n), seed,
                  &spec),
            stamp(stats::tolerance_test("AC-5/eigenvalue_trace", static_cast<double>(trace), 0.5, 1e-6, 1000000), 0,
                  nullptr),
        };
    }

    std::vector<stats::TestReport> dyadic_nesting()
    {
        const auto seed = criterion_seed(6);
        constexpr unsigned kFinest = 16;
        std::size_t mismatches = 0;
        std::size_t compared = 0;
        for (std::uint64_t s = 0; s < 100; ++s) {
            const StreamKey key{seed, s};
            GeneratorSpec fine_spec = bm_spec(1.0, std::size_t{1} << kFinest);
            fine_spec.kind = GeneratorKind::kDyadicRefine;
            const Path fine = generate_dyadic(fine_spec, key, kFinest);
            for (unsigned m = 1; m < kFinest; ++m) {
                GeneratorSpec coarse_spec = bm_spec(1.0, std::size_t{1} << m);
                coarse_spec.kind = GeneratorKind::kDyadicRefine;
                const Path coarse = generate_dyadic(coarse_spec, key, m);
                const std::size_t stride = std::size_t{1} << (kFinest - m);
                for (std::size_t k = 0; k < coarse.size(); ++k) {
                    mismatches += coarse[k] == fine[k * stride] ? 0 : 1;
                    ++compared;
                }
            }
        }
        stats::TestReport r;
        r.test_name = "AC-6/dyadic_nesting";
        r.kind = "exact";
        r.sample_size = compared;
        r.statistic = static_cast<double>(mismatches);
        r.threshold = 0.0;
        r.passed = mismatches == 0;
        r.notes = "levels=1..16;seeds=100";
        GeneratorSpec spec = bm_spec(1.0, std::size_t{1} << kFinest);
        spec.kind = GeneratorKind::kDyadicRefine;
        return {stamp(r, seed, &spec)};
    }

    std::vector<stats::TestReport> quadratic_variation_check()
    {
        const auto seed = criterion_seed(7);
        const auto spec = bm_spec(1.0, 1u << 16);
        const auto qv = ensemble<double>(spec, seed, 1000, workers_,
                                         [](std::size_t, const Path& p) { return quadratic_variation(p, 1.0); });
        const double mean = stats::mc_mean(qv).estimate;
        const auto close = std::count_if(qv.begin(), qv.end(), [](double v) { return std::abs(v - 1.0) < 0.03; });
        return {
            stamp(stats::tolerance_test("AC-7/mean_qv", mean, 1.0, 0.002, qv.size()), seed, &spec),
            stamp(at_least("AC-7/fraction_within_0.03", static_cast<double>(close) / qv.size(), 0.99, qv.size()),
                  seed, &spec),
        };
    }

    std::vector<stats::TestReport> donsker()
    {
        const auto seed = criterion_seed(8);
        GeneratorSpec spec = bm_spec(1.0, 1);
        spec.kind = GeneratorKind::kDonskerPartialSum;
        spec.donsker_n = 1024;
        spec.increment_law = IncrementLaw::kCoin;
        const auto z = ensemble<double>(spec, seed, 50000, workers_, [](std::size_t, const Path& p) { return p[1]; });
        auto ks = stats::ks_test(z, laws::distribution_cdf("normal", {}), 0.01, "AC-8/donsker_ks");
        return {stamp(ks_fixed(std::move(ks), 0.015), seed, &spec)};
    }

    std::vector<stats::TestReport> empirical_process()
    {
        const auto seed = criterion_seed(9);
        GeneratorSpec spec = bm_spec(1.0, 2);
        spec.kind = GeneratorKind::kEmpiricalProcess;
        spec.sample_size = 10000;
        const auto w = ensemble<double>(spec, seed, 50000, workers_, [](std::size_t, const Path& p) { return p[1]; });
        auto ks = stats::ks_test(w, laws::distribution_cdf("normal", {{"variance", 0.25}}), 0.01,
                                 "AC-9/empirical_process_ks");
        return {stamp(ks_fixed(std::move(ks), 0.015), seed, &spec)};
    }

    std::vector<stats::TestReport> local_time()
    {
        const auto seed = criterion_seed(10);
        const auto spec = bm_spec(1.0, 1u << 16);
        constexpr std::size_t n = 1000;
        const std::vector<double> eps{0x1p-4, 0x1p-5, 0x1p-6, 0x1p-7, 0x1p-8};
        std::vector<double> gap(n);
        std::vector<std::vector<double>> zero(eps.size(), std::vector<double>(n));
        for_each_path(PathGenerator(spec), seed, n, workers_, [&](std::size_t i, const Path& p) {
            const double tanaka = local_time_tanaka(p, 0.0, 1.0).value;
            const double occupation = local_time_occupation(p, 0.0, 1.0, 0x1p-6).value;
            gap[i] = std::abs(tanaka - occupation);
            for (std::size_t e = 0; e < eps.size(); ++e) {
                zero[e][i] = zero_measure_estimate(p, eps[e]);
            }
        });
        std::vector<stats::TestReport> out;
        out.push_back(stamp(below("AC-10/mean_abs_tanaka_minus_occupation", stats::mc_mean(gap).estimate, 0.05, n),
                            seed, &spec));
        for (std::size_t e = 0; e + 1 < eps.size(); ++e) {
            const double ratio = stats::mc_mean(zero[e + 1]).estimate / stats::mc_mean(zero[e]).estimate;
            out.push_back(stamp(in_band("AC-10/zero_measure_ratio_eps=" + format_double(eps[e]), ratio, 0.4, 0.6, n),
                                seed, &spec));
        }
        return out;
    }

    std::vector<stats::TestReport> roughness_and_modulus()
    {
        const auto seed = criterion_seed(11);
        const auto fine = bm_spec(1.0, 1u << 20);
        const auto modulus = ensemble<double>(fine, seed, 20, workers_,
                                              [](std::size_t, const Path& p) { return modulus_statistic(p, 0x1p-14); });
        const auto in = std::count_if(modulus.begin(), modulus.end(),
                                      [](double m) { return m >= kModulusLow && m <= kModulusHigh; });

        const auto coarse = bm_spec(1.0, 1u << 16);
        const auto rough = ensemble<double>(coarse, seed + 1, 1000, workers_,
                                            [](std::size_t, const Path& p) { return roughness_statistic(p); });
        const auto above = std::count_if(rough.begin(), rough.end(), [](double r) { return r > kRoughnessThreshold; });
        auto sorted = rough;
        std::sort(sorted.begin(), sorted.end());

        auto modulus_report = at_least("AC-11/modulus_in_band_fraction", static_cast<double>(in) / 20.0, 0.9, 20);
        modulus_report.notes = "band=[" + format_double(kModulusLow) + "," + format_double(kModulusHigh) +
                               "];min=" + format_double(*std::min_element(modulus.begin(), modulus.end())) +
                               ";max=" + format_double(*std::max_element(modulus.begin(), modulus.end()));
        auto rough_report = at_least("AC-11/roughness_above_threshold_fraction",
                                     static_cast<double>(above) / rough.size(), 0.99, rough.size());
        rough_report.notes = "threshold=" + format_double(kRoughnessThreshold) +
                             ";q01=" + format_double(sorted[10]) + ";median=" + format_double(sorted[500]) +
                             ";max=" + format_double(sorted.back());
        return {stamp(modulus_report, seed, &fine), stamp(rough_report, seed + 1, &coarse)};
    }

    std::vector<stats::TestReport> sign_change()
    {
        const auto seed = criterion_seed(12);
        const auto spec = bm_spec(1.0, 1u << 20);
        const auto hits = ensemble<int>(spec, seed, 1000, workers_,
                                        [](std::size_t, const Path& p) { return sign_change_by(p, 0.01) ? 1 : 0; });
        const auto count = std::count(hits.begin(), hits.end(), 1);
        return {stamp(at_least("AC-12/sign_change_fraction", static_cast<double>(count) / hits.size(), 0.97,
                               hits.size()),
                      seed, &spec)};
    }

    std::vector<stats::TestReport> truncated_hitting()
    {
        const auto seed = criterion_seed(13);
        constexpr double kHorizon = 8.0;
        constexpr int kBins = 20;
        const auto spec = bm_spec(kHorizon, 1u << 17);
        const auto gammas = ensemble<std::optional<double>>(
            spec, seed, 100000, workers_,
            [](std::size_t, const Path& p) { return truncated_hitting_time(p, 0.0).time; });
        const double width = (kHorizon - 1.0) / kBins;
        std::vector<std::size_t> counts(kBins, 0);
        std::size_t observed = 0;
        for (const auto& g : gammas) {
            if (!g) {
                continue;
            }
            const auto bin = std::min(kBins - 1, static_cast<int>(std::ceil((*g - 1.0) / width)) - 1);
            ++counts[std::max(0, bin)];
            ++observed;
        }
        const double mass = laws::truncated_hitting_cdf(kHorizon);
        double worst = 0.0;
        for (int b = 0; b < kBins; ++b) {
            const double expected =
                (laws::truncated_hitting_cdf(1.0 + width * (b + 1)) - laws::truncated_hitting_cdf(1.0 + width * b)) /
                mass;
            worst = std::max(worst, std::abs(static_cast<double>(counts[b]) / observed - expected));
        }
        auto r = below("AC-13/max_bin_discrepancy", worst, 0.015, observed);
        r.notes = "censored=" + std::to_string(gammas.size() - observed) +
                  ";expected_censoring_rate=" + format_double(1.0 - mass);
        return {stamp(r, seed, &spec)};
    }

    std::vector<stats::TestReport> harness_calibration()
    {
        const auto seed = criterion_seed(14);
        int rejected = 0;
        std::vector<double> sample(10000);
        const auto identity = laws::distribution_cdf("uniform", {});
        for (std::uint64_t s = 0; s < 200; ++s) {
            UniformStream u({seed + s, 0});
            for (auto& x : sample) {
                x = u();
            }
            rejected += stats::ks_test(sample, identity, 0.05).passed ? 0 : 1;
        }
        auto r = in_band("AC-14/ks_rejections_of_200", rejected, 4, 16, 200);
        r.notes += ";sample_size=10000;alpha=0.05";
        return {stamp(r, seed, nullptr)};
    }

    unsigned workers_;
    std::optional<ExperimentResult> reflection_;
};

std::ofstream open(const std::filesystem::path& file)
{
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + file.string() + "' for writing");
    }
    return out;
}

}  // namespace

bool Outcome::passed() const noexcept
{
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

std::string Outcome::summary_line() const
{
    const auto g = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", v);
        return std::string(buf);
    };
    std::ostringstream line;
    line << id << (passed() ? " PASS " : " FAIL ") << title;
    for (const auto& c : checks) {
        const auto slash = c.test_name.find('/');
        line << " | " << (slash == std::string::npos ? c.test_name : c.test_name.substr(slash + 1)) << ' ';
        if (c.kind == "tolerance" && c.notes.starts_with("band=")) {
            const auto comma = c.notes.find(',');
            const auto end = c.notes.find(']');
            line << g(*c.estimate) << " in [" << g(std::stod(c.notes.substr(6, comma - 6))) << ','
                 << g(std::stod(c.notes.substr(comma + 1, end - comma - 1))) << ']';
        } else if (c.kind == "tolerance") {
            line << g(*c.estimate) << " vs " << g(*c.target) << " +/- " << g(c.threshold);
        } else if (c.kind == "upper_bound" || c.kind == "ks") {
            line << g(c.statistic) << " < " << g(c.threshold);
        } else if (c.kind == "lower_bound") {
            line << g(c.statistic) << " >= " << g(c.threshold);
        } else {
            line << g(c.statistic) << " (limit " << g(c.threshold) << ")";
        }
        line << (c.passed ? " ok" : " FAILED");
    }
    return line.str();
}

const std::vector<Criterion>& criteria()
{
    static const std::vector<Criterion> list{
        {"AC-1", "running maximum tail P(M(1)>1)"},
        {"AC-2", "joint reflection law P(M(1)>1, B(1)<0)"},
        {"AC-3", "first hitting time of 1, censored KS"},
        {"AC-4", "arcsine law of the last zero"},
        {"AC-5", "Karhunen-Loeve moments and eigenvalue trace"},
        {"AC-6", "dyadic refinement nesting"},
        {"AC-7", "quadratic variation"},
        {"AC-8", "Donsker partial sums, coin increments"},
        {"AC-9", "empirical process at one half"},
        {"AC-10", "local time cross-validation and zero-set scaling"},
        {"AC-11", "Levy modulus band and roughness"},
        {"AC-12", "instant sign change"},
        {"AC-13", "truncated hitting time histogram"},
        {"AC-14", "KS harness false rejection count"},
    };
    return list;
}

ExperimentConfig reflection_config()
{
    ExperimentConfig c;
    c.experiment_name = "reflection";
    c.generator = bm_spec(1.0, 1u << 14);
    c.replications = 100000;
    c.master_seed = criterion_seed(1);
    c.output_dir = "out/reflection";
    c.functionals = {{"max1", "running_max", {{"t", 1.0}}}, {"b1", "value_at", {{"t", 1.0}}}};

    TestRequest tail;
    tail.name = "max_tail";
    tail.kind = TestKind::kProbability;
    tail.events = {{"max1", ">", 1.0, std::nullopt}};
    tail.target = Target{laws::evaluate_law("max_cdf_complement", {{"a", 1.0}, {"t", 1.0}})};
    tail.tolerance = 0.012;

    TestRequest joint;
    joint.name = "joint_reflection";
    joint.kind = TestKind::kProbability;
    joint.events = {{"max1", ">", 1.0, std::nullopt}, {"b1", "<", 0.0, std::nullopt}};
    joint.target = Target{laws::evaluate_law("reflection_joint_prob", {{"a", 1.0}, {"b", 0.0}, {"t", 1.0}})};
    joint.tolerance = 0.006;

    c.tests = {tail, joint};
    return c;
}

std::uint64_t criterion_seed(int number)
{
    return 20260000ULL + static_cast<std::uint64_t>(number) * 1000ULL;
}

std::vector<Outcome> run(const Options& options)
{
    const auto& list = criteria();
    for (const auto& id : options.only) {
        if (std::none_of(list.begin(), list.end(), [&](const auto& c) { return c.id == id; })) {
            throw ConfigError("unknown acceptance criterion '" + id + "'");
        }
    }
    std::ofstream reports;
    std::ofstream summary;
    if (options.output_dir) {
        std::filesystem::create_directories(*options.output_dir);
        reports = open(*options.output_dir / "reports.jsonl");
        summary = open(*options.output_dir / "summary.csv");
        write_summary_header(summary);
    }

    Runner runner(options.workers);
    std::vector<Outcome> outcomes;
    for (std::size_t i = 0; i < list.size(); ++i) {
        if (!options.only.empty() &&
            std::find(options.only.begin(), options.only.end(), list[i].id) == options.only.end()) {
            continue;
        }
        Outcome outcome{list[i].id, list[i].title, {}, 0.0};
        const auto start = std::chrono::steady_clock::now();
        outcome.checks = runner.run(static_cast<int>(i) + 1);
        outcome.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (options.output_dir) {
            for (const auto& c : outcome.checks) {
                reports << report_to_json(c) << '\n';
                write_summary_row(summary, c);
            }
            reports.flush();
            summary.flush();
        }
        if (options.on_outcome) {
            options.on_outcome(outcome);
        }
        outcomes.push_back(std::move(outcome));
    }
    if (options.output_dir) {
        auto text = open(*options.output_dir / "acceptance.txt");
        for (const auto& o : outcomes) {
            text << o.summary_line() << '\n';
        }
    }
    return outcomes;
}

}  // namespace bmsim::acceptance
