#include "bmsim/paths.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "bmsim/error.hpp"
#include "bmsim/format.hpp"

namespace bmsim {

TimeGrid::TimeGrid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps), step_(0.0)
{
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw DomainError("TimeGrid: horizon must be positive and finite");
    }
    if (steps == 0) {
        throw DomainError("TimeGrid: steps must be positive");
    }
    step_ = horizon / static_cast<double>(steps);
}

std::optional<std::size_t> TimeGrid::grid_index(double t) const noexcept
{
    if (!(t >= 0.0) || t > horizon_ + 1e-9 * step_) {
        return std::nullopt;
    }
    const double scaled = std::round(t / step_);
    if (scaled < 0.0 || scaled > static_cast<double>(steps_)) {
        return std::nullopt;
    }
    const auto k = static_cast<std::size_t>(scaled);
    if (std::abs(time(k) - t) > 1e-9 * step_) {
        return std::nullopt;
    }
    return k;
}

std::size_t TimeGrid::segment_index(double t) const noexcept
{
    if (t <= 0.0) {
        return 0;
    }
    if (t >= horizon_) {
        return steps_;
    }
    auto k = static_cast<std::size_t>(std::floor(t / step_));
    if (k > steps_) {
        k = steps_;
    }
    // floor(t / step) can land one off near a node; settle on t_k <= t < t_{k+1}.
    while (k > 0 && time(k) > t) {
        --k;
    }
    while (k < steps_ && time(k + 1) <= t) {
        ++k;
    }
    return k;
}

Path::Path(TimeGrid grid, std::vector<double> values) : grid_(grid), values_(std::move(values))
{
    if (values_.size() != grid_.size()) {
        throw PreconditionError("Path: expected " + std::to_string(grid_.size()) + " values, got " +
                                std::to_string(values_.size()));
    }
    for (const double v : values_) {
        if (!std::isfinite(v)) {
            throw PreconditionError("Path: values must be finite");
        }
    }
}

double value_at(const Path& path, double t)
{
    const TimeGrid& grid = path.grid();
    if (!(t >= 0.0 && t <= grid.horizon())) {
        throw DomainError("value_at: t outside [0, horizon]");
    }
    const std::size_t k = grid.segment_index(t);
    const double tk = grid.time(k);
    if (tk == t || k == grid.steps()) {
        return path[k];
    }
    const double frac = (t - tk) / grid.step();
    return path[k] + (path[k + 1] - path[k]) * frac;
}

Path restrict(const Path& path, double new_horizon)
{
    const auto k = path.grid().grid_index(new_horizon);
    if (!k || *k == 0) {
        throw PreconditionError("restrict: new horizon must be a positive grid point");
    }
    if (*k == path.steps()) {
        return path;
    }
    const auto values = path.values();
    return Path(TimeGrid(path.grid().time(*k), *k),
                std::vector<double>(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(*k + 1)));
}

void write_path_csv(std::ostream& out, const Path& path)
{
    out << "t,value\n";
    for (std::size_t k = 0; k < path.grid().size(); ++k) {
        out << format_double(path.grid().time(k)) << ',' << format_double(path[k]) << '\n';
    }
}

}  // namespace bmsim
