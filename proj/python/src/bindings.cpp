// Thin pybind11 layer over the C++ library. Configs, generator specs and reports
// cross the boundary as JSON text; the Python package wraps them as dicts.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bmsim/ensemble.hpp"
#include "bmsim/error.hpp"
#include "bmsim/experiment.hpp"
#include "bmsim/functionals.hpp"
#include "bmsim/laws.hpp"
#include "bmsim/stats.hpp"

namespace py = pybind11;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

py::array_t<double> simulate(const std::string& generator_json, std::uint64_t seed, std::size_t count,
                             unsigned workers)
{
    const bmsim::PathGenerator generator(bmsim::parse_generator_spec(generator_json));
    const std::size_t width = generator.spec().grid.size();
    py::array_t<double> out({count, width});
    double* data = out.mutable_data();
    {
        py::gil_scoped_release release;
        bmsim::for_each_path(generator, seed, count, workers, [&](std::size_t i, const bmsim::Path& path) {
            const auto values = path.values();
            std::copy(values.begin(), values.end(), data + i * width);
        });
    }
    return out;
}

std::vector<double> grid_times(const std::string& generator_json)
{
    const auto spec = bmsim::parse_generator_spec(generator_json);
    std::vector<double> t(spec.grid.size());
    for (std::size_t k = 0; k < t.size(); ++k) {
        t[k] = spec.grid.time(k);
    }
    return t;
}

// One value per row of `paths`; censored results become NaN.
py::array_t<double> evaluate(const std::string& name, const bmsim::laws::Params& params, const Array& paths,
                             double horizon)
{
    if (paths.ndim() != 2 || paths.shape(1) < 2) {
        throw bmsim::PreconditionError("paths must be a 2-d array with at least two columns");
    }
    const bmsim::FunctionalRequest request{"f", name, params};
    bmsim::validate_functional(request);
    const auto rows = static_cast<std::size_t>(paths.shape(0));
    const auto width = static_cast<std::size_t>(paths.shape(1));
    const bmsim::TimeGrid grid(horizon, width - 1);
    py::array_t<double> out(static_cast<py::ssize_t>(rows));
    auto result = out.mutable_unchecked<1>();
    const double* data = paths.data();
    for (std::size_t i = 0; i < rows; ++i) {
        const bmsim::Path path(grid, std::vector<double>(data + i * width, data + (i + 1) * width));
        const auto value = bmsim::evaluate_functional(request, path);
        result(static_cast<py::ssize_t>(i)) = value.value_or(std::numeric_limits<double>::quiet_NaN());
    }
    return out;
}

std::string ks_test(const Array& sample, const std::string& distribution, const bmsim::laws::Params& params,
                    double alpha)
{
    const std::vector<double> values(sample.data(), sample.data() + sample.size());
    const auto cdf = bmsim::laws::distribution_cdf(distribution, params);
    return bmsim::report_to_json(bmsim::stats::ks_test(values, cdf, alpha));
}

std::vector<std::string> run_experiment(const std::string& config_json, std::optional<std::string> output_dir,
                                        unsigned workers, std::size_t paths_to_write)
{
    const auto config = bmsim::parse_config(config_json);
    bmsim::ExperimentResult result;
    {
        py::gil_scoped_release release;
        if (output_dir) {
            bmsim::RunOptions options;
            options.workers = workers;
            options.paths_to_write = paths_to_write;
            result = bmsim::run_experiment(config, *output_dir, options);
        } else {
            result = bmsim::run_experiment_in_memory(config, workers);
        }
    }
    std::vector<std::string> reports;
    for (const auto& r : result.reports) {
        reports.push_back(bmsim::report_to_json(r));
    }
    return reports;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Brownian motion simulation core";

    // Registered so they are matched before their std:: bases.
    py::register_exception<bmsim::ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<bmsim::SpecError>(m, "SpecError", PyExc_ValueError);
    py::register_exception<bmsim::PreconditionError>(m, "PreconditionError", PyExc_ValueError);
    py::register_exception<bmsim::DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<bmsim::IoError>(m, "IoError", PyExc_OSError);

    m.def("simulate", &simulate, py::arg("generator"), py::arg("seed"), py::arg("count"), py::arg("workers") = 1,
          "Paths 0..count-1 for the seed as a (count, steps+1) array.");
    m.def("grid_times", &grid_times, py::arg("generator"));
    m.def("evaluate", &evaluate, py::arg("name"), py::arg("params"), py::arg("paths"), py::arg("horizon"));
    m.def("functional_names", [] {
        std::vector<std::string> names;
        for (const auto& f : bmsim::functional_catalog()) {
            names.emplace_back(f.name);
        }
        return names;
    });
    m.def("law", [](const std::string& name, const bmsim::laws::Params& params) {
        return bmsim::laws::evaluate_law(name, params).value;
    }, py::arg("name"), py::arg("params"));
    m.def("law_names", [] {
        std::vector<std::string> names;
        for (const auto& law : bmsim::laws::law_catalog()) {
            names.emplace_back(law.name);
        }
        return names;
    });
    m.def("ks_test", &ks_test, py::arg("sample"), py::arg("distribution"), py::arg("params"), py::arg("alpha"));
    m.def("run_experiment", &run_experiment, py::arg("config"), py::arg("output_dir"), py::arg("workers") = 1,
          py::arg("paths_to_write") = 0);
    m.def("emit_law_table", [](const std::string& law, const std::string& grid, const std::filesystem::path& file) {
        bmsim::emit_law_table(law, bmsim::parse_law_grid(grid), file);
    }, py::arg("law"), py::arg("grid"), py::arg("file"));
}
