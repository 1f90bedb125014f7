#pragma once

#include <optional>
#include <string_view>

#include "bmsim/paths.hpp"

namespace bmsim {

// All functionals act on the linearly interpolated path. Times outside
// [0, horizon] raise DomainError unless noted otherwise.

enum class HitMethod {
    kGrid,          // the level is attained exactly at a grid node
    kInterpolated,  // crossing solved inside a segment
};

std::string_view to_string(HitMethod method) noexcept;

struct HittingRecord {
    double level = 0.0;
    std::optional<double> time;  // nullopt: CENSORED, no crossing before the horizon
    HitMethod method = HitMethod::kGrid;
    bool degenerate = false;  // level equals the start value; time is 0 by convention

    [[nodiscard]] bool censored() const noexcept { return !time.has_value(); }
};

enum class LocalTimeMethod { kOccupation, kTanaka };

std::string_view to_string(LocalTimeMethod method) noexcept;

struct LocalTimeEstimate {
    double level = 0.0;
    double time = 0.0;
    std::optional<double> epsilon;  // occupation method only
    double value = 0.0;
    LocalTimeMethod method = LocalTimeMethod::kOccupation;
};

/// Maximum of the interpolated path over [0, t].
double running_max(const Path& path, double t);

/// tau_a = inf{t > 0 : X(t) = a}. For a == start value returns time 0 flagged degenerate.
HittingRecord first_hitting_time(const Path& path, double level);

/// sup{s <= t : X(s) = 0}, or nullopt when the path never touches 0 on [0, t].
std::optional<double> last_zero_before(const Path& path, double t);

/// gamma_a = inf{t > 1 : X(t) = a}; requires horizon > 1.
HittingRecord truncated_hitting_time(const Path& path, double level);

/// Lebesgue measure of {s <= t : X(s) in (lo, hi)}, exact for the piecewise-linear path.
double occupation_time(const Path& path, double t, double lo, double hi);

/// Occupation of (a - eps, a + eps) up to t divided by 2 eps.
LocalTimeEstimate local_time_occupation(const Path& path, double level, double t, double epsilon);

/// |X(t) - a| - |X(0) - a| - sum sgn(X(t_k) - a) (X(t_{k+1}) - X(t_k)), left-point (Ito) sum
/// with sgn(0) = 0; the last partial segment runs to t. For X(0) = 0 this is Tanaka's
/// |B(t) - a| - |a| - int sgn(B - a) dB. May come out slightly negative.
LocalTimeEstimate local_time_tanaka(const Path& path, double level, double t);

/// Sum of squared increments over grid steps up to t; t must be a grid point.
double quadratic_variation(const Path& path, double t);

/// max over grid pairs with |t_k - t_j| <= delta of |X(t_k) - X(t_j)|, divided by the
/// Levy modulus g(delta). Requires step <= delta < 1.
double modulus_statistic(const Path& path, double delta);

/// min over k of max_{j in {k, k+1, k+2}} |X(t_j) - X(t_{j-1})| / step. Requires steps >= 4.
double roughness_statistic(const Path& path);

/// occupation_time(path, horizon, (-eps, eps)).
double zero_measure_estimate(const Path& path, double epsilon);

/// True iff grid values in (0, delta] include both a strictly positive and a strictly
/// negative value. Requires start value 0 and delta >= step.
bool sign_change_by(const Path& path, double delta);

}  // namespace bmsim
