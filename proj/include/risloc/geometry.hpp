#ifndef RISLOC_GEOMETRY_HPP
#define RISLOC_GEOMETRY_HPP

#include <utility>

namespace risloc::geometry
{

struct Position2D
{
    double x = 0.0; // meters
    double y = 0.0;
};

/// Reported MS position m_hat = m + e with ||e|| <= error_bound.
struct LocationPrior
{
    Position2D reported_position;
    double error_bound = 0.0; // meters
};

/// Closed angular interval in radians, kept inside [0, pi].
struct AngularInterval
{
    double lower = 0.0;
    double upper = 0.0;

    [[nodiscard]] double width() const noexcept { return upper - lower; }
    [[nodiscard]] bool contains(double angle) const noexcept
    {
        return lower <= angle && angle <= upper;
    }
};

/// Interval [a, b] of spatial frequencies f = sin(theta), -1 <= a <= b <= 1.
struct FrequencyInterval
{
    double a = -1.0;
    double b = 1.0;

    [[nodiscard]] double width() const noexcept { return b - a; }
    [[nodiscard]] bool contains(double f) const noexcept
    {
        return a <= f && f <= b;
    }
};

/// Builds a FrequencyInterval, throwing std::invalid_argument unless
/// -1 <= a <= b <= 1.
FrequencyInterval make_frequency_interval(double a, double b);

double distance(Position2D p, Position2D q) noexcept;

/// Departure/arrival angle pair of the LoS link from `from` to `to`:
/// theta = arccos((to.x - from.x) / ||to - from||), phi = pi - theta.
/// Throws std::domain_error on coincident points.
std::pair<double, double> bearing_angles(Position2D from, Position2D to);

/// Departure angle at the RIS towards the reported MS position.
double los_angle_estimate(Position2D ris, const LocationPrior& prior);

/// theta_hat +- arcsin(epsilon / d_hat), clamped to [0, pi]. When
/// epsilon > d_hat the prior carries no angular information and the full
/// range [0, pi] is returned.
AngularInterval aod_uncertainty_interval(double theta_hat, double d_hat,
                                         double epsilon);

/// Reflection phi = pi - theta applied to both endpoints.
AngularInterval aoa_interval_from_aod(const AngularInterval& interval);

/// Range of sin(theta) over the interval. sin is not monotone on [0, pi], so
/// an interval straddling pi/2 maps to an upper endpoint of exactly 1.
FrequencyInterval interval_to_frequency(const AngularInterval& interval);

/// Full prior pipeline for the LoS path of the RIS-MS link. `orientation` is
/// the known MS array orientation, subtracted from the AoA interval before
/// mapping to frequencies.
struct LosPrior
{
    AngularInterval aod; // at the RIS
    AngularInterval aoa; // at the MS
    FrequencyInterval aod_frequency;
    FrequencyInterval aoa_frequency;
};

LosPrior los_prior(Position2D ris, const LocationPrior& prior,
                   double orientation = 0.0);

} // namespace risloc::geometry

#endif
