#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "bmsim/acceptance.hpp"
#include "bmsim/error.hpp"
#include "bmsim/experiment.hpp"
#include "bmsim/functionals.hpp"
#include "doctest.h"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& file)
{
    std::ifstream in(file, std::ios::binary);
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("bmsim_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

const char* kSmall = R"({
  "schema_version": 1,
  "experiment_name": "small",
  "generator": {"kind": "ExactIncrement", "horizon": 1, "steps": 64},
  "replications": 300,
  "master_seed": 5,
  "functionals": [
    {"id": "b1", "name": "value_at", "params": {"t": 1}},
    {"id": "tau", "name": "first_hitting_time", "params": {"a": 1}},
    {"id": "max1", "name": "running_max", "params": {"t": 1}}
  ],
  "tests": [
    {"name": "normal_endpoint", "kind": "ks", "functional": "b1", "distribution": {"name": "normal"}, "alpha": 0.01},
    {"name": "mean_zero", "kind": "mean", "functional": "b1", "target": 0, "tolerance": 0.5},
    {"name": "impossible", "kind": "mean", "functional": "b1", "target": 10, "tolerance": 0.1}
  ],
  "output_dir": "unused"
})";

}  // namespace

TEST_CASE("config parsing")
{
    const auto config = bmsim::parse_config(kSmall);
    CHECK(config.experiment_name == "small");
    CHECK(config.generator.grid.steps() == 64);
    CHECK(config.replications == 300);
    CHECK(config.functionals.size() == 3);
    CHECK(config.tests.size() == 3);
    CHECK(config.tests[0].kind == bmsim::TestKind::kKs);
    // Round trip through the canonical form.
    CHECK(bmsim::to_json(bmsim::parse_config(bmsim::to_json(config))) == bmsim::to_json(config));
}

TEST_CASE("config errors name the offending key")
{
    const auto error_of = [](const std::string& text) {
        try {
            bmsim::parse_config(text);
        } catch (const bmsim::ConfigError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    std::string bad = kSmall;
    CHECK(error_of(std::string(kSmall).replace(bad.find("\"value_at\""), 10, "\"value_of\"")).find("value_of") !=
          std::string::npos);
    CHECK(error_of(std::string(kSmall).replace(bad.find("\"output_dir\""), 12, "\"output_dr\"")).find("output_dr") !=
          std::string::npos);
    CHECK(error_of(std::string(kSmall).replace(bad.find("\"functional\": \"b1\", \"target\": 10"), 18,
                                               "\"functional\": \"b9\""))
              .find("b9") != std::string::npos);
    CHECK(error_of(std::string(kSmall).replace(bad.find("\"schema_version\": 1"), 19, "\"schema_version\": 2"))
              .find("schema_version") != std::string::npos);
    CHECK(error_of(std::string(kSmall).replace(bad.find("\"replications\": 300"), 19, "\"replications\": 0"))
              .find("replications") != std::string::npos);
    CHECK(error_of(std::string(kSmall).replace(bad.find("\"normal\"}"), 8, "\"cauchy\""))
              .find("cauchy") != std::string::npos);
    CHECK(error_of("{not json").find("JSON") != std::string::npos);
}

TEST_CASE("run_experiment writes deterministic outputs independent of worker count")
{
    const auto config = bmsim::parse_config(kSmall);
    const auto one = scratch("one");
    const auto four = scratch("four");
    bmsim::RunOptions options;
    options.paths_to_write = 3;
    const auto result = bmsim::run_experiment(config, one, options);
    options.workers = 4;
    bmsim::run_experiment(config, four, options);

    for (const auto* name : {"manifest.json", "functionals.csv", "reports.jsonl", "summary.csv",
                             "paths/path_000000.csv", "paths/path_000002.csv"}) {
        INFO(name);
        CHECK(fs::exists(one / name));
        CHECK(slurp(one / name) == slurp(four / name));
    }
    CHECK_FALSE(fs::exists(one / "paths/path_000003.csv"));

    REQUIRE(result.reports.size() == 3);
    CHECK(result.reports[0].passed);
    CHECK(result.reports[1].passed);
    CHECK_FALSE(result.reports[2].passed);
    CHECK_FALSE(result.all_passed());

    const auto summary = slurp(one / "summary.csv");
    CHECK(summary.starts_with("test_name,statistic,threshold,passed\nnormal_endpoint,"));
    CHECK(summary.find("\nimpossible,") != std::string::npos);
    CHECK(summary.find("false\n") != std::string::npos);
    CHECK(summary.find('\r') == std::string::npos);

    const auto functionals = slurp(one / "functionals.csv");
    CHECK(functionals.starts_with("path_index,functional_name,params,value\n0,value_at,t=1,"));
    CHECK(functionals.find(",first_hitting_time,a=1,CENSORED\n") != std::string::npos);

    const auto manifest = slurp(one / "manifest.json");
    CHECK(manifest.find("\"master_seed\": 5") != std::string::npos);
    CHECK(manifest.find("\"count\": 300") != std::string::npos);
    CHECK(manifest.find("\"steps\": 64") != std::string::npos);
}

TEST_CASE("the seed changes the outputs")
{
    auto config = bmsim::parse_config(kSmall);
    const auto a = bmsim::run_experiment_in_memory(config);
    config.master_seed = 6;
    const auto b = bmsim::run_experiment_in_memory(config);
    CHECK(a.reports[0].statistic != b.reports[0].statistic);
}

TEST_CASE("a config without tests writes only the manifest and data")
{
    auto config = bmsim::parse_config(kSmall);
    config.tests.clear();
    const auto dir = scratch("notests");
    const auto result = bmsim::run_experiment(config, dir);
    CHECK(result.all_passed());
    CHECK(fs::exists(dir / "manifest.json"));
    CHECK(slurp(dir / "summary.csv") == "test_name,statistic,threshold,passed\n");
}

TEST_CASE("unwritable output directory is an I/O error")
{
    const auto config = bmsim::parse_config(kSmall);
    const auto blocker = scratch("blocker") / "file";
    std::ofstream(blocker) << "x";
    CHECK_THROWS_AS(bmsim::run_experiment(config, blocker / "sub"), bmsim::IoError);
}

TEST_CASE("functionals by name agree with direct calls")
{
    const bmsim::Path p(bmsim::TimeGrid(1.0, 2), {0.0, 0.5, 1.2});
    CHECK(bmsim::evaluate_functional({"x", "value_at", {{"t", 0.75}}}, p) == bmsim::value_at(p, 0.75));
    CHECK(bmsim::evaluate_functional({"x", "first_hitting_time", {{"a", 1.0}}}, p) ==
          bmsim::first_hitting_time(p, 1.0).time);
    CHECK_FALSE(bmsim::evaluate_functional({"x", "first_hitting_time", {{"a", 3.0}}}, p).has_value());
    CHECK(bmsim::evaluate_functional({"x", "sign_change_by", {{"delta", 1.0}}}, p) == 0.0);
    CHECK_THROWS_AS(bmsim::evaluate_functional({"x", "value_at", {}}, p), bmsim::ConfigError);
    CHECK_THROWS_AS(bmsim::evaluate_functional({"x", "value_at", {{"t", 1.0}, {"s", 1.0}}}, p), bmsim::ConfigError);
    CHECK(bmsim::format_params({{"t", 0.5}, {"a", 1.0}}) == "a=1;t=0.5");
}

TEST_CASE("law tables")
{
    std::ostringstream out;
    bmsim::write_law_table(out, "arcsine_cdf", bmsim::parse_law_grid("s=0:1:5"));
    std::istringstream rows(out.str());
    std::string line;
    std::getline(rows, line);
    CHECK(line == "s,value");
    const double expected[] = {0.0, 1.0 / 3.0, 0.5, 2.0 / 3.0, 1.0};
    for (const double e : expected) {
        REQUIRE(std::getline(rows, line));
        CHECK(std::stod(line.substr(line.find(',') + 1)) == doctest::Approx(e).epsilon(1e-15));
    }
    CHECK_FALSE(std::getline(rows, line));

    std::ostringstream empty;
    bmsim::write_law_table(empty, "arcsine_cdf", bmsim::parse_law_grid("s="));
    CHECK(empty.str() == "s,value\n");

    std::ostringstream product;
    bmsim::write_law_table(product, "hitting_cdf", bmsim::parse_law_grid("a=1,2;T=1,4"));
    CHECK(product.str().starts_with("a,T,value\n1,1,"));
    CHECK(product.str().find("\n2,4,") != std::string::npos);

    const auto dir = scratch("laws");
    CHECK_THROWS_AS(bmsim::emit_law_table("hitting_density", bmsim::parse_law_grid("a=1;T=1,0"), dir / "t.csv"),
                    bmsim::DomainError);
    CHECK_FALSE(fs::exists(dir / "t.csv"));
    CHECK_THROWS_AS(bmsim::emit_law_table("no_such_law", {}, dir / "u.csv"), bmsim::ConfigError);
    CHECK_THROWS_AS(bmsim::emit_law_table("arcsine_cdf", bmsim::parse_law_grid("x=1"), dir / "u.csv"),
                    bmsim::ConfigError);
    CHECK_FALSE(fs::exists(dir / "u.csv"));
    bmsim::emit_law_table("arcsine_cdf", bmsim::parse_law_grid("s=0.5"), dir / "nested" / "v.csv");
    CHECK(slurp(dir / "nested" / "v.csv").starts_with("s,value\n0.5,"));
    CHECK_THROWS_AS(bmsim::parse_law_grid("s=0:1"), bmsim::ConfigError);
    CHECK_THROWS_AS(bmsim::parse_law_grid("s=0,abc"), bmsim::ConfigError);
}

TEST_CASE("shipped reflection config matches the AC-1/AC-2 experiment")
{
    const auto shipped = bmsim::load_config(fs::path(BMSIM_SOURCE_DIR) / "configs" / "reflection.json");
    CHECK(bmsim::to_json(shipped) == bmsim::to_json(bmsim::acceptance::reflection_config()));
}

TEST_CASE("every shipped config parses")
{
    for (const auto& entry : fs::directory_iterator(fs::path(BMSIM_SOURCE_DIR) / "configs")) {
        INFO(entry.path().string());
        CHECK_NOTHROW(bmsim::load_config(entry.path()));
    }
}
