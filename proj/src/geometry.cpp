#include "risloc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "risloc/types.hpp"

namespace risloc
{

double wrap_frequency(double f) noexcept
{
    double w = std::fmod(f + 1.0, 2.0);
    if (w < 0.0)
    {
        w += 2.0;
    }
    w -= 1.0;
    // fmod can land exactly on the excluded endpoint after rounding
    return w >= 1.0 ? -1.0 : w;
}

} // namespace risloc

namespace risloc::geometry
{

namespace
{

double clamp_angle(double a) noexcept { return std::clamp(a, 0.0, kPi); }

} // namespace

FrequencyInterval make_frequency_interval(double a, double b)
{
    if (!(a >= -1.0 && a <= b && b <= 1.0))
    {
        throw std::invalid_argument(
            "frequency interval must satisfy -1 <= a <= b <= 1");
    }
    return {a, b};
}

double distance(Position2D p, Position2D q) noexcept
{
    return std::hypot(q.x - p.x, q.y - p.y);
}

std::pair<double, double> bearing_angles(Position2D from, Position2D to)
{
    const double d = distance(from, to);
    if (!(d > 0.0))
    {
        throw std::domain_error("bearing_angles: coincident points");
    }
    const double theta = std::acos(std::clamp((to.x - from.x) / d, -1.0, 1.0));
    return {theta, kPi - theta};
}

double los_angle_estimate(Position2D ris, const LocationPrior& prior)
{
    return bearing_angles(ris, prior.reported_position).first;
}

AngularInterval aod_uncertainty_interval(double theta_hat, double d_hat,
                                         double epsilon)
{
    if (!(d_hat > 0.0) || epsilon < 0.0)
    {
        throw std::invalid_argument(
            "aod_uncertainty_interval: need d_hat > 0 and epsilon >= 0");
    }
    if (epsilon > d_hat)
    {
        return {0.0, kPi};
    }
    const double half = std::asin(epsilon / d_hat);
    return {clamp_angle(theta_hat - half), clamp_angle(theta_hat + half)};
}

AngularInterval aoa_interval_from_aod(const AngularInterval& interval)
{
    return {clamp_angle(kPi - interval.upper), clamp_angle(kPi - interval.lower)};
}

FrequencyInterval interval_to_frequency(const AngularInterval& interval)
{
    const double lo = clamp_angle(interval.lower);
    const double hi = clamp_angle(interval.upper);
    const double s_lo = std::sin(lo);
    const double s_hi = std::sin(hi);
    const double b = (lo <= kPi / 2 && kPi / 2 <= hi) ? 1.0 : std::max(s_lo, s_hi);
    return {std::min(s_lo, s_hi), b};
}

LosPrior los_prior(Position2D ris, const LocationPrior& prior,
                   double orientation)
{
    const double theta_hat = los_angle_estimate(ris, prior);
    const double d_hat = distance(ris, prior.reported_position);

    LosPrior out;
    out.aod = aod_uncertainty_interval(theta_hat, d_hat, prior.error_bound);
    out.aoa = aoa_interval_from_aod(out.aod);
    out.aoa.lower = clamp_angle(out.aoa.lower - orientation);
    out.aoa.upper = clamp_angle(out.aoa.upper - orientation);
    out.aod_frequency = interval_to_frequency(out.aod);
    out.aoa_frequency = interval_to_frequency(out.aoa);
    return out;
}

} // namespace risloc::geometry
