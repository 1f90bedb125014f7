#include "bmsim/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <system_error>

#include "bmsim/ensemble.hpp"
#include "bmsim/error.hpp"
#include "bmsim/format.hpp"
#include "bmsim/functionals.hpp"
#include "json.hpp"

namespace bmsim {

using Json = nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Functional dispatch

using Evaluator = std::function<std::optional<double>(const Path&)>;

double param(const laws::Params& params, std::string_view name)
{
    const auto it = params.find(name);
    if (it == params.end()) {
        throw ConfigError("missing parameter '" + std::string(name) + "'");
    }
    return it->second;
}

std::optional<double> hit_time(const HittingRecord& record)
{
    return record.time;
}

Evaluator compile_functional(const FunctionalRequest& request)
{
    validate_functional(request);
    const auto& p = request.params;
    const std::string& name = request.name;
    if (name == "value_at") {
        return [t = param(p, "t")](const Path& path) { return std::optional(value_at(path, t)); };
    }
    if (name == "running_max") {
        return [t = param(p, "t")](const Path& path) { return std::optional(running_max(path, t)); };
    }
    if (name == "first_hitting_time") {
        return [a = param(p, "a")](const Path& path) { return hit_time(first_hitting_time(path, a)); };
    }
    if (name == "last_zero_before") {
        return [t = param(p, "t")](const Path& path) { return last_zero_before(path, t); };
    }
    if (name == "truncated_hitting_time") {
        return [a = param(p, "a")](const Path& path) { return hit_time(truncated_hitting_time(path, a)); };
    }
    if (name == "occupation_time") {
        return [t = param(p, "t"), lo = param(p, "lo"), hi = param(p, "hi")](const Path& path) {
            return std::optional(occupation_time(path, t, lo, hi));
        };
    }
    if (name == "local_time_occupation") {
        return [a = param(p, "a"), t = param(p, "t"), eps = param(p, "epsilon")](const Path& path) {
            return std::optional(local_time_occupation(path, a, t, eps).value);
        };
    }
    if (name == "local_time_tanaka") {
        return [a = param(p, "a"), t = param(p, "t")](const Path& path) {
            return std::optional(local_time_tanaka(path, a, t).value);
        };
    }
    if (name == "quadratic_variation") {
        return [t = param(p, "t")](const Path& path) { return std::optional(quadratic_variation(path, t)); };
    }
    if (name == "modulus_statistic") {
        return [d = param(p, "delta")](const Path& path) { return std::optional(modulus_statistic(path, d)); };
    }
    if (name == "roughness_statistic") {
        return [](const Path& path) { return std::optional(roughness_statistic(path)); };
    }
    if (name == "zero_measure_estimate") {
        return [e = param(p, "epsilon")](const Path& path) { return std::optional(zero_measure_estimate(path, e)); };
    }
    // sign_change_by; validate_functional has rejected everything else.
    return [d = param(p, "delta")](const Path& path) { return std::optional(sign_change_by(path, d) ? 1.0 : 0.0); };
}

const FunctionalInfo* find_functional(std::string_view name)
{
    const auto& catalog = functional_catalog();
    const auto it = std::find_if(catalog.begin(), catalog.end(), [&](const auto& f) { return f.name == name; });
    return it == catalog.end() ? nullptr : &*it;
}

// ---------------------------------------------------------------------------
// JSON helpers

void check_keys(const Json& object, std::string_view where, std::initializer_list<std::string_view> allowed,
                std::initializer_list<std::string_view> required = {})
{
    if (!object.is_object()) {
        throw ConfigError(std::string(where) + ": expected an object");
    }
    for (const auto& [key, value] : object.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
        }
    }
    for (const auto key : required) {
        if (!object.contains(key)) {
            throw ConfigError(std::string(where) + ": missing key '" + std::string(key) + "'");
        }
    }
}

template <class T>
T get(const Json& object, const std::string& key, std::string_view where)
{
    try {
        return object.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string(where) + ": key '" + key + "' has the wrong type");
    }
}

double get_number(const Json& object, const std::string& key, std::string_view where)
{
    if (!object.at(key).is_number()) {
        throw ConfigError(std::string(where) + ": key '" + key + "' must be a number");
    }
    return object.at(key).get<double>();
}

std::size_t get_count(const Json& object, const std::string& key, std::string_view where)
{
    const Json& v = object.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        throw ConfigError(std::string(where) + ": key '" + key + "' must be a nonnegative integer");
    }
    return v.get<std::size_t>();
}

laws::Params parse_params(const Json& object, std::string_view where)
{
    if (!object.is_object()) {
        throw ConfigError(std::string(where) + ": params must be an object");
    }
    laws::Params params;
    for (const auto& [key, value] : object.items()) {
        if (!value.is_number()) {
            throw ConfigError(std::string(where) + ": parameter '" + key + "' must be a number");
        }
        params[key] = value.get<double>();
    }
    return params;
}

Json params_json(const laws::Params& params)
{
    Json out = Json::object();
    for (const auto& [k, v] : params) {
        out[k] = v;
    }
    return out;
}

GeneratorSpec parse_generator(const Json& j)
{
    constexpr std::string_view where = "generator";
    check_keys(j, where,
               {"kind", "horizon", "steps", "start_value", "kl_terms", "donsker_n", "increment_law", "sample_size",
                "base_distribution"},
               {"kind", "horizon", "steps"});
    GeneratorSpec spec;
    spec.kind = parse_generator_kind(get<std::string>(j, "kind", where));
    try {
        spec.grid = TimeGrid(get_number(j, "horizon", where), get_count(j, "steps", where));
    } catch (const DomainError& e) {
        throw ConfigError(std::string("generator: ") + e.what());
    }
    if (j.contains("start_value")) {
        spec.start_value = get_number(j, "start_value", where);
    }
    if (j.contains("kl_terms")) {
        spec.kl_terms = get_count(j, "kl_terms", where);
    }
    if (j.contains("donsker_n")) {
        spec.donsker_n = get_count(j, "donsker_n", where);
    }
    if (j.contains("increment_law")) {
        spec.increment_law = parse_increment_law(get<std::string>(j, "increment_law", where));
    }
    if (j.contains("sample_size")) {
        spec.sample_size = get_count(j, "sample_size", where);
    }
    if (j.contains("base_distribution") && get<std::string>(j, "base_distribution", where) != "uniform") {
        throw ConfigError("generator: key 'base_distribution' supports only \"uniform\"");
    }
    try {
        spec.validate();
    } catch (const SpecError& e) {
        throw ConfigError(std::string("generator: ") + e.what());
    }
    return spec;
}

Json generator_json(const GeneratorSpec& spec)
{
    Json j;
    j["kind"] = std::string(to_string(spec.kind));
    j["horizon"] = spec.grid.horizon();
    j["steps"] = spec.grid.steps();
    j["start_value"] = spec.start_value;
    switch (spec.kind) {
        case GeneratorKind::kKarhunenLoeve: j["kl_terms"] = spec.kl_terms; break;
        case GeneratorKind::kDonskerPartialSum:
            j["donsker_n"] = spec.donsker_n;
            j["increment_law"] = std::string(to_string(spec.increment_law));
            break;
        case GeneratorKind::kEmpiricalProcess:
            j["sample_size"] = spec.sample_size;
            j["base_distribution"] = "uniform";
            break;
        default: break;
    }
    return j;
}

Target parse_target(const Json& j, std::string_view where)
{
    if (j.is_number()) {
        return Target{j.get<double>()};
    }
    const std::string here = std::string(where) + ".target";
    check_keys(j, here, {"law", "params"}, {"law"});
    const auto name = get<std::string>(j, "law", here);
    const auto params = j.contains("params") ? parse_params(j.at("params"), here) : laws::Params{};
    try {
        return Target{laws::evaluate_law(name, params)};
    } catch (const DomainError& e) {
        throw ConfigError(here + ": " + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError(here + ": " + e.what());
    }
}

Json target_json(const Target& target)
{
    if (const auto* literal = std::get_if<double>(&target.value)) {
        return *literal;
    }
    const auto& eval = std::get<laws::LawEval>(target.value);
    return Json{{"law", eval.law_name}, {"params", params_json(eval.params)}};
}

TestKind parse_test_kind(const std::string& name, std::string_view where)
{
    static const std::map<std::string, TestKind, std::less<>> kinds{{"ks", TestKind::kKs},
                                                                     {"probability", TestKind::kProbability},
                                                                     {"mean", TestKind::kMean},
                                                                     {"variance", TestKind::kVariance},
                                                                     {"covariance", TestKind::kCovariance}};
    const auto it = kinds.find(name);
    if (it == kinds.end()) {
        throw ConfigError(std::string(where) + ": unknown test kind '" + name + "'");
    }
    return it->second;
}

Json test_json(const TestRequest& t)
{
    Json j;
    j["name"] = t.name;
    j["kind"] = std::string(to_string(t.kind));
    switch (t.kind) {
        case TestKind::kKs:
            j["functional"] = t.functional;
            j["distribution"] = Json{{"name", t.distribution}, {"params", params_json(t.distribution_params)}};
            j["alpha"] = t.alpha;
            break;
        case TestKind::kProbability: {
            Json events = Json::array();
            for (const auto& e : t.events) {
                Json ej{{"functional", e.functional}, {"op", e.op}, {"value", e.value}};
                if (e.center) {
                    ej["center"] = *e.center;
                }
                events.push_back(ej);
            }
            j["events"] = events;
            break;
        }
        case TestKind::kMean:
            j["functional"] = t.functional;
            if (!t.second_functional.empty()) {
                j["minus"] = t.second_functional;
            }
            j["absolute"] = t.absolute;
            break;
        case TestKind::kVariance: j["functional"] = t.functional; break;
        case TestKind::kCovariance: j["functionals"] = Json::array({t.functional, t.second_functional}); break;
    }
    if (t.target) {
        j["target"] = target_json(*t.target);
        j["tolerance"] = t.tolerance;
    }
    return j;
}

bool valid_name(std::string_view name)
{
    return !name.empty() && std::all_of(name.begin(), name.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
               c == '-' || c == '.';
    });
}

// ---------------------------------------------------------------------------
// Test evaluation

using Column = std::vector<std::optional<double>>;

bool event_holds(const Event& e, const std::optional<double>& x)
{
    if (!x) {
        return false;
    }
    const double v = e.center ? std::abs(*x - *e.center) : *x;
    if (e.op == "<") {
        return v < e.value;
    }
    if (e.op == "<=") {
        return v <= e.value;
    }
    if (e.op == ">") {
        return v > e.value;
    }
    return v >= e.value;
}

std::vector<double> present(const Column& column, std::size_t& censored)
{
    std::vector<double> out;
    out.reserve(column.size());
    censored = 0;
    for (const auto& v : column) {
        if (v) {
            out.push_back(*v);
        } else {
            ++censored;
        }
    }
    return out;
}

std::string censor_note(std::size_t censored)
{
    return censored == 0 ? std::string() : "excluded_censored=" + std::to_string(censored);
}

stats::TestReport run_test(const TestRequest& t, const ExperimentConfig& config,
                           const std::map<std::string, const Column*, std::less<>>& columns)
{
    const auto column = [&](const std::string& id) -> const Column& { return *columns.at(id); };
    const std::size_t n = config.replications;
    stats::TestReport report;
    switch (t.kind) {
        case TestKind::kKs: {
            const auto cdf = laws::distribution_cdf(t.distribution, t.distribution_params);
            const auto& request = *std::find_if(config.functionals.begin(), config.functionals.end(),
                                                [&](const auto& f) { return f.id == t.functional; });
            if (find_functional(request.name)->censorable) {
                const auto it = request.params.find("t");
                const double horizon = it != request.params.end() ? it->second : config.generator.grid.horizon();
                report = stats::ks_test_censored(column(t.functional), cdf, horizon, t.alpha, t.name);
            } else {
                std::size_t censored = 0;
                const auto sample = present(column(t.functional), censored);
                report = stats::ks_test(sample, cdf, t.alpha, t.name);
            }
            break;
        }
        case TestKind::kProbability: {
            std::size_t hits = 0;
            for (std::size_t i = 0; i < n; ++i) {
                bool all = true;
                for (const auto& e : t.events) {
                    all = all && event_holds(e, column(e.functional)[i]);
                }
                hits += all ? 1 : 0;
            }
            const double p = static_cast<double>(hits) / static_cast<double>(n);
            report = stats::tolerance_test(t.name, p, t.target->resolve(), t.tolerance, n);
            report.notes = "count=" + std::to_string(hits);
            break;
        }
        case TestKind::kMean: {
            std::vector<double> values;
            std::size_t censored = 0;
            const auto& x = column(t.functional);
            for (std::size_t i = 0; i < n; ++i) {
                std::optional<double> v = x[i];
                if (v && !t.second_functional.empty()) {
                    const auto& y = column(t.second_functional)[i];
                    v = y ? std::optional(*v - *y) : std::nullopt;
                }
                if (!v) {
                    ++censored;
                    continue;
                }
                values.push_back(t.absolute ? std::abs(*v) : *v);
            }
            if (values.size() < 2) {
                throw DomainError(t.name + ": fewer than 2 uncensored values");
            }
            const auto mean = stats::mc_mean(values);
            report = stats::tolerance_test(t.name, mean.estimate, t.target->resolve(), t.tolerance, values.size());
            report.notes = "halfwidth_95=" + format_double(mean.halfwidth_95);
            if (censored > 0) {
                report.notes += ";" + censor_note(censored);
            }
            break;
        }
        case TestKind::kVariance: {
            std::size_t censored = 0;
            const auto values = present(column(t.functional), censored);
            report = stats::tolerance_test(t.name, stats::sample_variance(values), t.target->resolve(), t.tolerance,
                                           values.size());
            report.notes = censor_note(censored);
            break;
        }
        case TestKind::kCovariance: {
            std::vector<double> xs;
            std::vector<double> ys;
            const auto& x = column(t.functional);
            const auto& y = column(t.second_functional);
            for (std::size_t i = 0; i < n; ++i) {
                if (x[i] && y[i]) {
                    xs.push_back(*x[i]);
                    ys.push_back(*y[i]);
                }
            }
            report = stats::tolerance_test(t.name, stats::sample_covariance(xs, ys), t.target->resolve(),
                                           t.tolerance, xs.size());
            report.notes = censor_note(n - xs.size());
            break;
        }
    }
    report.master_seed = config.master_seed;
    report.generator_spec = to_json(config.generator);
    return report;
}

std::ofstream open_output(const std::filesystem::path& file)
{
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + file.string() + "' for writing");
    }
    return out;
}

struct Evaluation {
    std::vector<Column> columns;
};

Evaluation evaluate_all(const ExperimentConfig& config, unsigned workers,
                        const std::function<void(std::size_t, const Path&)>& on_path)
{
    std::vector<Evaluator> evaluators;
    for (const auto& f : config.functionals) {
        evaluators.push_back(compile_functional(f));
    }
    Evaluation eval;
    eval.columns.assign(evaluators.size(), Column(config.replications));
    const PathGenerator generator(config.generator);
    for_each_path(generator, config.master_seed, config.replications, workers,
                  [&](std::size_t i, const Path& path) {
                      for (std::size_t f = 0; f < evaluators.size(); ++f) {
                          eval.columns[f][i] = evaluators[f](path);
                      }
                      if (on_path) {
                          on_path(i, path);
                      }
                  });
    return eval;
}

std::map<std::string, const Column*, std::less<>> index_columns(const ExperimentConfig& config, const Evaluation& eval)
{
    std::map<std::string, const Column*, std::less<>> out;
    for (std::size_t f = 0; f < config.functionals.size(); ++f) {
        out[config.functionals[f].id] = &eval.columns[f];
    }
    return out;
}

Json manifest_json(const ExperimentConfig& config)
{
    Json j;
    j["schema_version"] = config.schema_version;
    j["experiment_name"] = config.experiment_name;
    j["generator"] = generator_json(config.generator);
    j["master_seed"] = config.master_seed;
    j["count"] = config.replications;
    j["grid"] = Json{{"horizon", config.generator.grid.horizon()},
                     {"steps", config.generator.grid.steps()},
                     {"step", config.generator.grid.step()}};
    Json functionals = Json::array();
    for (const auto& f : config.functionals) {
        functionals.push_back(Json{{"id", f.id}, {"name", f.name}, {"params", params_json(f.params)}});
    }
    j["functionals"] = functionals;
    Json tests = Json::array();
    for (const auto& t : config.tests) {
        tests.push_back(t.name);
    }
    j["tests"] = tests;
    return j;
}

}  // namespace

// ---------------------------------------------------------------------------

const std::vector<FunctionalInfo>& functional_catalog()
{
    static const std::vector<FunctionalInfo> catalog{
        {"value_at", {"t"}, false},
        {"running_max", {"t"}, false},
        {"first_hitting_time", {"a"}, true},
        {"last_zero_before", {"t"}, true},
        {"truncated_hitting_time", {"a"}, true},
        {"occupation_time", {"t", "lo", "hi"}, false},
        {"local_time_occupation", {"a", "t", "epsilon"}, false},
        {"local_time_tanaka", {"a", "t"}, false},
        {"quadratic_variation", {"t"}, false},
        {"modulus_statistic", {"delta"}, false},
        {"roughness_statistic", {}, false},
        {"zero_measure_estimate", {"epsilon"}, false},
        {"sign_change_by", {"delta"}, false},
    };
    return catalog;
}

void validate_functional(const FunctionalRequest& request)
{
    const auto* info = find_functional(request.name);
    if (info == nullptr) {
        throw ConfigError("unknown functional '" + request.name + "'");
    }
    for (const auto name : info->params) {
        if (!request.params.contains(name)) {
            throw ConfigError(request.name + ": missing parameter '" + std::string(name) + "'");
        }
    }
    for (const auto& [key, value] : request.params) {
        if (std::find(info->params.begin(), info->params.end(), key) == info->params.end()) {
            throw ConfigError(request.name + ": unknown parameter '" + key + "'");
        }
    }
}

std::optional<double> evaluate_functional(const FunctionalRequest& request, const Path& path)
{
    return compile_functional(request)(path);
}

std::string format_params(const laws::Params& params)
{
    std::string out;
    for (const auto& [key, value] : params) {
        if (!out.empty()) {
            out += ';';
        }
        out += key + "=" + format_double(value);
    }
    return out;
}

double Target::resolve() const
{
    if (const auto* literal = std::get_if<double>(&value)) {
        return *literal;
    }
    return std::get<laws::LawEval>(value).value;
}

std::string_view to_string(TestKind kind) noexcept
{
    switch (kind) {
        case TestKind::kKs: return "ks";
        case TestKind::kProbability: return "probability";
        case TestKind::kMean: return "mean";
        case TestKind::kVariance: return "variance";
        case TestKind::kCovariance: return "covariance";
    }
    return "unknown";
}

void ExperimentConfig::validate() const
{
    if (schema_version != kConfigSchemaVersion) {
        throw ConfigError("schema_version: unsupported version " + std::to_string(schema_version));
    }
    if (replications < 1) {
        throw ConfigError("replications: must be at least 1");
    }
    try {
        generator.validate();
    } catch (const SpecError& e) {
        throw ConfigError(std::string("generator: ") + e.what());
    }
    std::set<std::string, std::less<>> ids;
    for (const auto& f : functionals) {
        if (!valid_name(f.id)) {
            throw ConfigError("functionals: invalid id '" + f.id + "'");
        }
        if (!ids.insert(f.id).second) {
            throw ConfigError("functionals: duplicate id '" + f.id + "'");
        }
        validate_functional(f);
    }
    const auto known = [&](const std::string& id, const std::string& test) {
        if (!ids.contains(id)) {
            throw ConfigError("tests." + test + ": unknown functional '" + id + "'");
        }
    };
    std::set<std::string, std::less<>> names;
    for (const auto& t : tests) {
        if (!valid_name(t.name)) {
            throw ConfigError("tests: invalid name '" + t.name + "'");
        }
        if (!names.insert(t.name).second) {
            throw ConfigError("tests: duplicate name '" + t.name + "'");
        }
        switch (t.kind) {
            case TestKind::kKs:
                known(t.functional, t.name);
                (void)laws::distribution_cdf(t.distribution, t.distribution_params);
                if (t.alpha != 0.05 && t.alpha != 0.01) {
                    throw ConfigError("tests." + t.name + ": alpha must be 0.05 or 0.01");
                }
                break;
            case TestKind::kProbability:
                if (t.events.empty()) {
                    throw ConfigError("tests." + t.name + ": needs at least one event");
                }
                for (const auto& e : t.events) {
                    known(e.functional, t.name);
                    if (e.op != "<" && e.op != "<=" && e.op != ">" && e.op != ">=") {
                        throw ConfigError("tests." + t.name + ": unknown op '" + e.op + "'");
                    }
                }
                break;
            case TestKind::kMean:
                known(t.functional, t.name);
                if (!t.second_functional.empty()) {
                    known(t.second_functional, t.name);
                }
                break;
            case TestKind::kVariance: known(t.functional, t.name); break;
            case TestKind::kCovariance:
                known(t.functional, t.name);
                known(t.second_functional, t.name);
                break;
        }
        if (t.kind != TestKind::kKs) {
            if (!t.target) {
                throw ConfigError("tests." + t.name + ": missing target");
            }
            if (!(t.tolerance >= 0.0)) {
                throw ConfigError("tests." + t.name + ": tolerance must be nonnegative");
            }
        }
    }
}

ExperimentConfig parse_config(std::string_view json_text)
{
    Json root;
    try {
        root = Json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(root, "config",
               {"schema_version", "experiment_name", "generator", "replications", "master_seed", "functionals",
                "tests", "output_dir"},
               {"schema_version", "experiment_name", "generator", "replications", "master_seed"});
    ExperimentConfig config;
    config.schema_version = get<int>(root, "schema_version", "config");
    if (config.schema_version != kConfigSchemaVersion) {
        throw ConfigError("schema_version: unsupported version " + std::to_string(config.schema_version));
    }
    config.experiment_name = get<std::string>(root, "experiment_name", "config");
    config.generator = parse_generator(root.at("generator"));
    config.replications = get_count(root, "replications", "config");
    if (!root.at("master_seed").is_number_unsigned()) {
        throw ConfigError("config: key 'master_seed' must be a nonnegative integer");
    }
    config.master_seed = root.at("master_seed").get<std::uint64_t>();
    if (root.contains("output_dir")) {
        config.output_dir = get<std::string>(root, "output_dir", "config");
    }
    if (root.contains("functionals")) {
        const Json& list = root.at("functionals");
        if (!list.is_array()) {
            throw ConfigError("functionals: expected an array");
        }
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string where = "functionals[" + std::to_string(i) + "]";
            check_keys(list[i], where, {"id", "name", "params"}, {"name"});
            FunctionalRequest f;
            f.name = get<std::string>(list[i], "name", where);
            f.id = list[i].contains("id") ? get<std::string>(list[i], "id", where) : f.name;
            if (list[i].contains("params")) {
                f.params = parse_params(list[i].at("params"), where);
            }
            config.functionals.push_back(std::move(f));
        }
    }
    if (root.contains("tests")) {
        const Json& list = root.at("tests");
        if (!list.is_array()) {
            throw ConfigError("tests: expected an array");
        }
        for (std::size_t i = 0; i < list.size(); ++i) {
            const Json& j = list[i];
            const std::string where = "tests[" + std::to_string(i) + "]";
            if (!j.is_object() || !j.contains("kind")) {
                throw ConfigError(where + ": missing key 'kind'");
            }
            TestRequest t;
            t.kind = parse_test_kind(get<std::string>(j, "kind", where), where);
            switch (t.kind) {
                case TestKind::kKs:
                    check_keys(j, where, {"name", "kind", "functional", "distribution", "alpha"},
                               {"name", "functional", "distribution"});
                    t.functional = get<std::string>(j, "functional", where);
                    check_keys(j.at("distribution"), where + ".distribution", {"name", "params"}, {"name"});
                    t.distribution = get<std::string>(j.at("distribution"), "name", where + ".distribution");
                    if (j.at("distribution").contains("params")) {
                        t.distribution_params = parse_params(j.at("distribution").at("params"), where);
                    }
                    if (j.contains("alpha")) {
                        t.alpha = get_number(j, "alpha", where);
                    }
                    break;
                case TestKind::kProbability: {
                    check_keys(j, where, {"name", "kind", "events", "target", "tolerance"},
                               {"name", "events", "target", "tolerance"});
                    const Json& events = j.at("events");
                    if (!events.is_array()) {
                        throw ConfigError(where + ": 'events' must be an array");
                    }
                    for (std::size_t k = 0; k < events.size(); ++k) {
                        const std::string ew = where + ".events[" + std::to_string(k) + "]";
                        check_keys(events[k], ew, {"functional", "op", "value", "center"},
                                   {"functional", "op", "value"});
                        Event e;
                        e.functional = get<std::string>(events[k], "functional", ew);
                        e.op = get<std::string>(events[k], "op", ew);
                        e.value = get_number(events[k], "value", ew);
                        if (events[k].contains("center")) {
                            e.center = get_number(events[k], "center", ew);
                        }
                        t.events.push_back(std::move(e));
                    }
                    break;
                }
                case TestKind::kMean:
                    check_keys(j, where, {"name", "kind", "functional", "minus", "absolute", "target", "tolerance"},
                               {"name", "functional", "target", "tolerance"});
                    t.functional = get<std::string>(j, "functional", where);
                    if (j.contains("minus")) {
                        t.second_functional = get<std::string>(j, "minus", where);
                    }
                    if (j.contains("absolute")) {
                        t.absolute = get<bool>(j, "absolute", where);
                    }
                    break;
                case TestKind::kVariance:
                    check_keys(j, where, {"name", "kind", "functional", "target", "tolerance"},
                               {"name", "functional", "target", "tolerance"});
                    t.functional = get<std::string>(j, "functional", where);
                    break;
                case TestKind::kCovariance: {
                    check_keys(j, where, {"name", "kind", "functionals", "target", "tolerance"},
                               {"name", "functionals", "target", "tolerance"});
                    const auto pair = get<std::vector<std::string>>(j, "functionals", where);
                    if (pair.size() != 2) {
                        throw ConfigError(where + ": 'functionals' must name exactly two functionals");
                    }
                    t.functional = pair[0];
                    t.second_functional = pair[1];
                    break;
                }
            }
            t.name = get<std::string>(j, "name", where);
            if (j.contains("target")) {
                t.target = parse_target(j.at("target"), where);
            }
            if (j.contains("tolerance")) {
                t.tolerance = get_number(j, "tolerance", where);
            }
            config.tests.push_back(std::move(t));
        }
    }
    config.validate();
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw IoError("cannot read config '" + file.string() + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

GeneratorSpec parse_generator_spec(std::string_view json_text)
{
    Json j;
    try {
        j = Json::parse(json_text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("generator: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw ConfigError("generator: expected a JSON object");
    }
    return parse_generator(j);
}

std::string to_json(const GeneratorSpec& spec)
{
    return generator_json(spec).dump();
}

std::string to_json(const ExperimentConfig& config)
{
    Json j;
    j["schema_version"] = config.schema_version;
    j["experiment_name"] = config.experiment_name;
    j["generator"] = generator_json(config.generator);
    j["replications"] = config.replications;
    j["master_seed"] = config.master_seed;
    j["output_dir"] = config.output_dir;
    Json functionals = Json::array();
    for (const auto& f : config.functionals) {
        functionals.push_back(Json{{"id", f.id}, {"name", f.name}, {"params", params_json(f.params)}});
    }
    j["functionals"] = functionals;
    Json tests = Json::array();
    for (const auto& t : config.tests) {
        tests.push_back(test_json(t));
    }
    j["tests"] = tests;
    return j.dump();
}

bool ExperimentResult::all_passed() const noexcept
{
    return std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.passed; });
}

std::string report_to_json(const stats::TestReport& r)
{
    Json j;
    j["test_name"] = r.test_name;
    j["kind"] = r.kind;
    j["sample_size"] = r.sample_size;
    j["statistic"] = r.statistic;
    j["threshold"] = r.threshold;
    j["passed"] = r.passed;
    j["master_seed"] = r.master_seed;
    j["generator_spec"] = r.generator_spec.empty() ? Json(nullptr) : Json::parse(r.generator_spec);
    j["notes"] = r.notes;
    j["estimate"] = r.estimate ? Json(*r.estimate) : Json(nullptr);
    j["target"] = r.target ? Json(*r.target) : Json(nullptr);
    return j.dump();
}

void write_summary_header(std::ostream& out)
{
    out << "test_name,statistic,threshold,passed\n";
}

void write_summary_row(std::ostream& out, const stats::TestReport& r)
{
    out << r.test_name << ',' << format_double(r.statistic) << ',' << format_double(r.threshold) << ','
        << (r.passed ? "true" : "false") << '\n';
}

ExperimentResult run_experiment_in_memory(const ExperimentConfig& config, unsigned workers)
{
    config.validate();
    const auto eval = evaluate_all(config, workers, {});
    const auto columns = index_columns(config, eval);
    ExperimentResult result;
    for (const auto& t : config.tests) {
        result.reports.push_back(run_test(t, config, columns));
    }
    return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& output_dir,
                                const RunOptions& options)
{
    config.validate();
    std::error_code ec;
    std::filesystem::create_directories(output_dir, ec);
    if (ec || !std::filesystem::is_directory(output_dir)) {
        throw IoError("cannot create output directory '" + output_dir.string() + "'");
    }
    {
        auto manifest = open_output(output_dir / "manifest.json");
        manifest << manifest_json(config).dump(2) << '\n';
    }

    std::function<void(std::size_t, const Path&)> on_path;
    const std::size_t to_write = std::min(options.paths_to_write, config.replications);
    if (to_write > 0) {
        std::filesystem::create_directories(output_dir / "paths", ec);
        on_path = [&](std::size_t i, const Path& path) {
            if (i < to_write) {
                char name[32];
                std::snprintf(name, sizeof name, "path_%06zu.csv", i);
                auto out = open_output(output_dir / "paths" / name);
                write_path_csv(out, path);
            }
        };
    }
    const auto eval = evaluate_all(config, options.workers, on_path);

    if (options.write_functionals) {
        auto out = open_output(output_dir / "functionals.csv");
        out << "path_index,functional_name,params,value\n";
        std::vector<std::string> prefixes;
        for (const auto& f : config.functionals) {
            prefixes.push_back("," + f.name + "," + format_params(f.params) + ",");
        }
        for (std::size_t i = 0; i < config.replications; ++i) {
            for (std::size_t f = 0; f < config.functionals.size(); ++f) {
                const auto& v = eval.columns[f][i];
                out << i << prefixes[f] << (v ? format_double(*v) : std::string("CENSORED")) << '\n';
            }
        }
    }

    const auto columns = index_columns(config, eval);
    auto reports = open_output(output_dir / "reports.jsonl");
    auto summary = open_output(output_dir / "summary.csv");
    write_summary_header(summary);
    summary.flush();
    ExperimentResult result;
    for (const auto& t : config.tests) {
        result.reports.push_back(run_test(t, config, columns));
        reports << report_to_json(result.reports.back()) << '\n';
        write_summary_row(summary, result.reports.back());
        reports.flush();
        summary.flush();
    }
    if (!reports || !summary) {
        throw IoError("failed writing reports in '" + output_dir.string() + "'");
    }
    return result;
}

// ---------------------------------------------------------------------------
// Law tables

namespace {

double parse_number(std::string_view text, std::string_view context)
{
    while (!text.empty() && text.front() == ' ') {
        text.remove_prefix(1);
    }
    while (!text.empty() && text.back() == ' ') {
        text.remove_suffix(1);
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        throw ConfigError("grid: cannot parse '" + std::string(text) + "' in '" + std::string(context) + "'");
    }
    return value;
}

std::vector<std::string_view> split(std::string_view text, char sep)
{
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) {
            return parts;
        }
        start = pos + 1;
    }
}

}  // namespace

LawGrid parse_law_grid(std::string_view text)
{
    LawGrid grid;
    if (text.empty()) {
        return grid;
    }
    for (const auto axis : split(text, ';')) {
        const auto eq = axis.find('=');
        if (eq == std::string_view::npos || eq == 0) {
            throw ConfigError("grid: expected name=values in '" + std::string(axis) + "'");
        }
        std::string name(axis.substr(0, eq));
        const auto values = axis.substr(eq + 1);
        std::vector<double> points;
        if (values.find(':') != std::string_view::npos) {
            const auto parts = split(values, ':');
            if (parts.size() != 3) {
                throw ConfigError("grid: range must be start:stop:count in '" + std::string(axis) + "'");
            }
            const double lo = parse_number(parts[0], axis);
            const double hi = parse_number(parts[1], axis);
            const double count = parse_number(parts[2], axis);
            if (count < 0 || count != std::floor(count)) {
                throw ConfigError("grid: count must be a nonnegative integer in '" + std::string(axis) + "'");
            }
            const auto n = static_cast<std::size_t>(count);
            for (std::size_t i = 0; i < n; ++i) {
                points.push_back(n == 1 ? lo : (i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / (n - 1)));
            }
        } else if (!values.empty()) {
            for (const auto item : split(values, ',')) {
                points.push_back(parse_number(item, axis));
            }
        }
        grid.emplace_back(std::move(name), std::move(points));
    }
    return grid;
}

void write_law_table(std::ostream& out, std::string_view law, const LawGrid& grid)
{
    const auto& catalog = laws::law_catalog();
    const auto info = std::find_if(catalog.begin(), catalog.end(), [&](const auto& l) { return l.name == law; });
    if (info == catalog.end()) {
        throw ConfigError("unknown law '" + std::string(law) + "'");
    }
    std::set<std::string, std::less<>> axes;
    for (const auto& [name, values] : grid) {
        if (std::find(info->params.begin(), info->params.end(), name) == info->params.end()) {
            throw ConfigError(std::string(law) + ": unknown parameter '" + name + "'");
        }
        if (!axes.insert(name).second) {
            throw ConfigError(std::string(law) + ": duplicate parameter '" + name + "'");
        }
    }
    for (const auto name : info->params) {
        if (!axes.contains(name)) {
            throw ConfigError(std::string(law) + ": grid is missing parameter '" + std::string(name) + "'");
        }
    }

    std::ostringstream body;
    for (const auto& [name, values] : grid) {
        body << name << ',';
    }
    body << "value\n";
    std::size_t rows = grid.empty() ? 0 : 1;
    for (const auto& axis : grid) {
        rows *= axis.second.size();
    }
    std::vector<std::size_t> index(grid.size(), 0);
    for (std::size_t r = 0; r < rows; ++r) {
        laws::Params params;
        for (std::size_t a = 0; a < grid.size(); ++a) {
            params[grid[a].first] = grid[a].second[index[a]];
        }
        const double value = laws::evaluate_law(law, params).value;
        for (std::size_t a = 0; a < grid.size(); ++a) {
            body << format_double(grid[a].second[index[a]]) << ',';
        }
        body << format_double(value) << '\n';
        for (std::size_t a = grid.size(); a-- > 0;) {
            if (++index[a] < grid[a].second.size()) {
                break;
            }
            index[a] = 0;
        }
    }
    out << body.str();
}

void emit_law_table(std::string_view law, const LawGrid& grid, const std::filesystem::path& file)
{
    std::ostringstream table;
    write_law_table(table, law, grid);
    if (file.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(file.parent_path(), ec);
        if (ec) {
            throw IoError("cannot create '" + file.parent_path().string() + "': " + ec.message());
        }
    }
    auto out = open_output(file);
    out << table.str();
    if (!out) {
        throw IoError("failed writing '" + file.string() + "'");
    }
}

}  // namespace bmsim
