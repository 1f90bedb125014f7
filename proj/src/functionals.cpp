#include "bmsim/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "bmsim/error.hpp"
#include "bmsim/laws.hpp"

namespace bmsim {

namespace {

void require_time(const Path& path, double t, const char* op)
{
    if (!(t >= 0.0 && t <= path.horizon())) {
        throw DomainError(std::string(op) + ": t outside [0, horizon]");
    }
}

double sgn(double x) noexcept { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

double crossing_time(double t0, double v0, double t1, double v1, double level) noexcept
{
    return t0 + (t1 - t0) * ((level - v0) / (v1 - v0));
}

// First crossing of `level` strictly after the point (t0, v0), scanning grid nodes
// first_node..n.
HittingRecord scan_forward(const Path& path, double level, double t0, double v0, std::size_t first_node)
{
    HittingRecord record{level, std::nullopt, HitMethod::kGrid, false};
    const TimeGrid& grid = path.grid();
    double left_t = t0;
    double left_v = v0;
    for (std::size_t k = first_node; k <= grid.steps(); ++k) {
        const double right_t = grid.time(k);
        const double right_v = path[k];
        if (right_v == level) {
            record.time = right_t;
            record.method = HitMethod::kGrid;
            return record;
        }
        if ((left_v < level && right_v > level) || (left_v > level && right_v < level)) {
            record.time = crossing_time(left_t, left_v, right_t, right_v, level);
            record.method = HitMethod::kInterpolated;
            return record;
        }
        left_t = right_t;
        left_v = right_v;
    }
    return record;
}

// Length of the parameter set s in [0, 1] with v0 + (v1 - v0) s in (lo, hi).
double inside_fraction(double v0, double v1, double lo, double hi) noexcept
{
    if (v0 == v1) {
        return (v0 > lo && v0 < hi) ? 1.0 : 0.0;
    }
    double s_lo = (lo - v0) / (v1 - v0);
    double s_hi = (hi - v0) / (v1 - v0);
    if (s_lo > s_hi) {
        std::swap(s_lo, s_hi);
    }
    return std::max(0.0, std::min(s_hi, 1.0) - std::max(s_lo, 0.0));
}

}  // namespace

std::string_view to_string(HitMethod method) noexcept
{
    return method == HitMethod::kGrid ? "grid" : "interpolated";
}

std::string_view to_string(LocalTimeMethod method) noexcept
{
    return method == LocalTimeMethod::kOccupation ? "occupation" : "tanaka";
}

double running_max(const Path& path, double t)
{
    require_time(path, t, "running_max");
    const std::size_t k = path.grid().segment_index(t);
    const auto values = path.values();
    const double node_max = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k + 1));
    return std::max(node_max, value_at(path, t));
}

HittingRecord first_hitting_time(const Path& path, double level)
{
    if (level == path.start_value()) {
        return HittingRecord{level, 0.0, HitMethod::kGrid, true};
    }
    return scan_forward(path, level, 0.0, path.start_value(), 1);
}

std::optional<double> last_zero_before(const Path& path, double t)
{
    require_time(path, t, "last_zero_before");
    const TimeGrid& grid = path.grid();
    double right_t = t;
    double right_v = value_at(path, t);
    if (right_v == 0.0) {
        return t;
    }
    std::size_t k = grid.segment_index(t);
    if (grid.time(k) == t) {
        if (k == 0) {
            return std::nullopt;
        }
        --k;
    }
    for (;; --k) {
        const double left_t = grid.time(k);
        const double left_v = path[k];
        if (left_v == 0.0) {
            return left_t;
        }
        if ((left_v < 0.0 && right_v > 0.0) || (left_v > 0.0 && right_v < 0.0)) {
            return crossing_time(left_t, left_v, right_t, right_v, 0.0);
        }
        if (k == 0) {
            return std::nullopt;
        }
        right_t = left_t;
        right_v = left_v;
    }
}

HittingRecord truncated_hitting_time(const Path& path, double level)
{
    if (!(path.horizon() > 1.0)) {
        throw DomainError("truncated_hitting_time: horizon must exceed 1");
    }
    const std::size_t k = path.grid().segment_index(1.0);
    return scan_forward(path, level, 1.0, value_at(path, 1.0), k + 1);
}

double occupation_time(const Path& path, double t, double lo, double hi)
{
    if (!(lo < hi)) {
        throw DomainError("occupation_time: requires lo < hi");
    }
    require_time(path, t, "occupation_time");
    const TimeGrid& grid = path.grid();
    const std::size_t last = grid.segment_index(t);

    // Whole segments are counted, so the total mass is exactly t_k on grid points.
    std::size_t full = 0;
    double partial = 0.0;
    double compensation = 0.0;
    const auto add = [&](double x) {
        const double sum = partial + x;
        compensation += std::abs(partial) >= std::abs(x) ? (partial - sum) + x : (x - sum) + partial;
        partial = sum;
    };
    for (std::size_t k = 0; k < last; ++k) {
        const double v0 = path[k];
        const double v1 = path[k + 1];
        if (v0 > lo && v0 < hi && v1 > lo && v1 < hi) {
            ++full;
        } else {
            add(inside_fraction(v0, v1, lo, hi) * grid.step());
        }
    }
    const double tail = t - grid.time(last);
    if (tail > 0.0) {
        add(inside_fraction(path[last], value_at(path, t), lo, hi) * tail);
    }
    return grid.time(full) + (partial + compensation);
}

LocalTimeEstimate local_time_occupation(const Path& path, double level, double t, double epsilon)
{
    if (!(epsilon > 0.0)) {
        throw DomainError("local_time_occupation: epsilon must be positive");
    }
    const double occupation = occupation_time(path, t, level - epsilon, level + epsilon);
    return LocalTimeEstimate{level, t, epsilon, occupation / (2.0 * epsilon), LocalTimeMethod::kOccupation};
}

LocalTimeEstimate local_time_tanaka(const Path& path, double level, double t)
{
    require_time(path, t, "local_time_tanaka");
    const TimeGrid& grid = path.grid();
    const std::size_t last = grid.segment_index(t);
    double ito = 0.0;
    for (std::size_t k = 0; k < last; ++k) {
        ito += sgn(path[k] - level) * (path[k + 1] - path[k]);
    }
    const double end = value_at(path, t);
    if (grid.time(last) < t) {
        ito += sgn(path[last] - level) * (end - path[last]);
    }
    const double value = std::abs(end - level) - std::abs(path.start_value() - level) - ito;
    return LocalTimeEstimate{level, t, std::nullopt, value, LocalTimeMethod::kTanaka};
}

double quadratic_variation(const Path& path, double t)
{
    const auto k = path.grid().grid_index(t);
    if (!k) {
        throw PreconditionError("quadratic_variation: t must be a grid point");
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < *k; ++j) {
        const double d = path[j + 1] - path[j];
        sum += d * d;
    }
    return sum;
}

double modulus_statistic(const Path& path, double delta)
{
    const TimeGrid& grid = path.grid();
    if (!(delta >= grid.step() * (1.0 - 1e-12))) {
        throw DomainError("modulus_statistic: delta below the grid step");
    }
    const double g = laws::levy_modulus(delta);
    const std::size_t n = grid.steps();
    const auto window = std::min<std::size_t>(n, static_cast<std::size_t>(std::floor(delta / grid.step() + 1e-9)));

    // Sliding max/min of values over [k, k + window], scanned right to left.
    std::deque<std::size_t> maxq;
    std::deque<std::size_t> minq;
    double best = 0.0;
    for (std::size_t i = n + 1; i-- > 0;) {
        while (!maxq.empty() && maxq.front() > i + window) {
            maxq.pop_front();
        }
        while (!minq.empty() && minq.front() > i + window) {
            minq.pop_front();
        }
        while (!maxq.empty() && path[maxq.back()] <= path[i]) {
            maxq.pop_back();
        }
        maxq.push_back(i);
        while (!minq.empty() && path[minq.back()] >= path[i]) {
            minq.pop_back();
        }
        minq.push_back(i);
        best = std::max({best, path[maxq.front()] - path[i], path[i] - path[minq.front()]});
    }
    return best / g;
}

double roughness_statistic(const Path& path)
{
    const std::size_t n = path.steps();
    if (n < 4) {
        throw PreconditionError("roughness_statistic: needs at least 4 steps");
    }
    const double inv_step = 1.0 / path.grid().step();
    const auto scaled = [&](std::size_t j) { return std::abs(path[j] - path[j - 1]) * inv_step; };
    double result = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k + 2 <= n; ++k) {
        result = std::min(result, std::max({scaled(k), scaled(k + 1), scaled(k + 2)}));
    }
    return result;
}

double zero_measure_estimate(const Path& path, double epsilon)
{
    if (!(epsilon > 0.0)) {
        throw DomainError("zero_measure_estimate: epsilon must be positive");
    }
    return occupation_time(path, path.horizon(), -epsilon, epsilon);
}

bool sign_change_by(const Path& path, double delta)
{
    if (path.start_value() != 0.0) {
        throw PreconditionError("sign_change_by: path must start at 0");
    }
    if (!(delta >= path.grid().step() * (1.0 - 1e-12))) {
        throw PreconditionError("sign_change_by: delta below the grid step");
    }
    const std::size_t last = path.grid().segment_index(std::min(delta, path.horizon()));
    bool positive = false;
    bool negative = false;
    for (std::size_t k = 1; k <= last; ++k) {
        positive = positive || path[k] > 0.0;
        negative = negative || path[k] < 0.0;
        if (positive && negative) {
            return true;
        }
    }
    return false;
}

}  // namespace bmsim
