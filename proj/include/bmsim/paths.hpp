#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace bmsim {

/// Uniform partition of [0, horizon] into `steps` intervals. Grid points are
/// computed from their index, never accumulated.
class TimeGrid {
  public:
    TimeGrid(double horizon, std::size_t steps);

    [[nodiscard]] double horizon() const noexcept { return horizon_; }
    [[nodiscard]] std::size_t steps() const noexcept { return steps_; }
    [[nodiscard]] std::size_t size() const noexcept { return steps_ + 1; }
    [[nodiscard]] double step() const noexcept { return step_; }

    /// t_k = k*T/n; t_n is exactly T.
    [[nodiscard]] double time(std::size_t k) const noexcept
    {
        return k == steps_ ? horizon_ : static_cast<double>(k) * horizon_ / static_cast<double>(steps_);
    }

    /// Index k with t_k == t up to 1e-9 of a step, if t is a grid point.
    [[nodiscard]] std::optional<std::size_t> grid_index(double t) const noexcept;

    /// Largest k with t_k <= t, for t in [0, T].
    [[nodiscard]] std::size_t segment_index(double t) const noexcept;

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

  private:
    double horizon_;
    std::size_t steps_;
    double step_;
};

/// One realization on a grid: values[k] is the path at t_k, values[0] is the
/// start value x of P^x. Immutable once built.
class Path {
  public:
    /// Throws PreconditionError on a length mismatch or a non-finite value.
    Path(TimeGrid grid, std::vector<double> values);

    [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] double operator[](std::size_t k) const noexcept { return values_[k]; }
    [[nodiscard]] double start_value() const noexcept { return values_.front(); }
    [[nodiscard]] double horizon() const noexcept { return grid_.horizon(); }
    [[nodiscard]] std::size_t steps() const noexcept { return grid_.steps(); }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }

    /// Moves the value buffer out for reuse; the path is left empty.
    [[nodiscard]] std::vector<double> into_values() && noexcept { return std::move(values_); }

  private:
    TimeGrid grid_;
    std::vector<double> values_;
};

/// Linear interpolation of the path at t in [0, T]; exact node value on grid points.
double value_at(const Path& path, double t);

/// Prefix of the path up to grid time new_horizon.
Path restrict(const Path& path, double new_horizon);

/// CSV with header `t,value`, one row per grid point, 17 significant digits.
void write_path_csv(std::ostream& out, const Path& path);

}  // namespace bmsim
