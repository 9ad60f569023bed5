#include "macromc/channel.hpp"

#include "csv.hpp"
#include "macromc/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace macromc {

namespace {

bool positive_finite(double x)
{
    return std::isfinite(x) && x > 0.0;
}

bool valid_half_angle(Angle a)
{
    return a.radians() > 0.0 && a.radians() < std::numbers::pi / 2.0;
}

double cone_volume(double s, Angle half_angle)
{
    const double r = s * std::tan(half_angle.radians());
    return std::numbers::pi / 3.0 * s * r * r;
}

} // namespace

void TransmitterSpec::validate() const
{
    if (!positive_finite(Q)) {
        throw ValidationError("TransmitterSpec: Q must be > 0");
    }
    if (!positive_finite(Te)) {
        throw ValidationError("TransmitterSpec: Te must be > 0");
    }
    if (!positive_finite(rho_d)) {
        throw ValidationError("TransmitterSpec: rho_d must be > 0");
    }
    if (!valid_half_angle(theta)) {
        throw ValidationError("TransmitterSpec: theta must lie in (0, 90) degrees");
    }
    if (!(std::isfinite(gamma) && gamma >= 1.0)) {
        throw ValidationError("TransmitterSpec: gamma must be >= 1");
    }
}

void ConeGeometry::validate() const
{
    if (!positive_finite(s)) {
        throw ValidationError("ConeGeometry: s must be > 0");
    }
    if (!valid_half_angle(theta)) {
        throw ValidationError("ConeGeometry: theta must lie in (0, 90) degrees");
    }
    if (!(theta_rv.radians() > 0.0 && theta_rv <= theta)) {
        throw ValidationError("ConeGeometry: theta_rv must lie in (0, theta]");
    }
}

double ConeGeometry::outer_volume() const
{
    return cone_volume(s, theta);
}

double ConeGeometry::inner_volume() const
{
    return cone_volume(s, theta_rv);
}

double ConeGeometry::inner_diameter() const
{
    return 2.0 * s * std::tan(theta_rv.radians());
}

double ConeGeometry::max_gamma() const
{
    const double ratio = std::tan(theta.radians()) / std::tan(theta_rv.radians());
    return ratio * ratio;
}

namespace channel {

double scaling_factor(const ConeGeometry& geom, double gamma)
{
    geom.validate();
    const double upper = geom.max_gamma();
    if (!(gamma >= 1.0 && gamma <= upper)) {
        throw BoundsError("scaling_factor: spray coefficient", gamma, 1.0, upper);
    }
    const double ratio = std::tan(geom.theta_rv.radians()) / std::tan(geom.theta.radians());
    return std::min(ratio * ratio * gamma, 1.0);
}

double initial_concentration(const TransmitterSpec& tx, double s)
{
    tx.validate();
    if (!positive_finite(s)) {
        throw DomainError("initial_concentration: distance must be > 0, got " + std::to_string(s));
    }
    const double tan_theta = std::tan(tx.theta.radians());
    return 3.0 * tx.Q * tx.Te * tx.rho_d * tx.gamma / (std::numbers::pi * s * s * s * tan_theta * tan_theta);
}

double impulse_response(const TransmitterSpec& tx, const KineticsParams& kin, const SensorSpec& sensor,
                        double s, double t)
{
    sensor.validate();
    const double C0 = initial_concentration(tx, s);
    const double B = kinetics::bound_concentration(C0, kin, t);
    if (B == 0.0) {
        return 0.0;
    }
    const double ratio = sensor::sensitivity(B, sensor.sens);
    if (!(ratio > 0.0)) {
        throw DomainError("impulse_response: adhered concentration " + std::to_string(B) +
                          " kg/m^3 lies beyond the range where the sensitivity curve is positive");
    }
    return sensor::voltage_from_sensitivity(ratio, sensor);
}

Trace sample_response(const TransmitterSpec& tx, const KineticsParams& kin, const SensorSpec& sensor,
                      double s, std::span<const double> times)
{
    validate_time_grid(times, "sample_response");
    if (!times.empty() && times.front() < 0.0) {
        throw ValidationError("sample_response: time stamps must be >= 0");
    }
    std::vector<double> voltage;
    voltage.reserve(times.size());
    for (const double t : times) {
        voltage.push_back(impulse_response(tx, kin, sensor, s, t));
    }

    TraceMeta meta;
    meta.source = "model";
    auto& attr = meta.attributes;
    attr["k1"] = detail::format_double(kin.k1);
    attr["k2"] = detail::format_double(kin.k2);
    attr["gamma"] = detail::format_double(tx.gamma);
    attr["s"] = detail::format_double(s);
    attr["Q"] = detail::format_double(tx.Q);
    attr["Te"] = detail::format_double(tx.Te);
    attr["rho_d"] = detail::format_double(tx.rho_d);
    attr["theta_deg"] = detail::format_double(tx.theta.degrees());
    attr["Ein"] = detail::format_double(sensor.Ein);
    attr["RL"] = detail::format_double(sensor.RL);
    attr["Ro"] = detail::format_double(sensor.Ro);
    return Trace(std::vector<double>(times.begin(), times.end()), std::move(voltage), std::move(meta));
}

std::vector<double> uniform_grid(double t_end, double dt)
{
    if (!positive_finite(dt)) {
        throw DomainError("uniform_grid: dt must be > 0");
    }
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) {
        throw DomainError("uniform_grid: t_end must be >= 0");
    }
    const auto n = static_cast<std::size_t>(std::floor(t_end / dt + 1e-9)) + 1;
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i) {
        grid[i] = static_cast<double>(i) * dt;
    }
    return grid;
}

} // namespace channel
} // namespace macromc
