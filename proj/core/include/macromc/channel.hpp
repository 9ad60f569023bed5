#pragma once

#include "macromc/angle.hpp"
#include "macromc/kinetics.hpp"
#include "macromc/sensor.hpp"
#include "macromc/trace.hpp"

#include <span>

namespace macromc {

/// Sprayer emission: flow rate Q (m^3/s), emission time Te (s), liquid density
/// rho_d (kg/m^3), outer half-beamwidth theta and spray coefficient gamma.
struct TransmitterSpec {
    double Q = 2.204e-6;
    double Te = 0.5;
    double rho_d = 789.0;
    Angle theta = Angle::degrees(38.0);
    double gamma = 1.0;

    /// Emitted mass Q * Te * rho_d, kg.
    double emitted_mass() const { return Q * Te * rho_d; }

    /// Throws ValidationError on a non-physical value.
    void validate() const;
};

/// Two concentric spray cones sharing apex and axis, of length s.
struct ConeGeometry {
    double s = 1.0;
    Angle theta;    ///< outer half-beamwidth
    Angle theta_rv; ///< inner half-beamwidth enclosing the reception volume

    void validate() const;

    double outer_volume() const;
    double inner_volume() const;
    /// Base diameter of the inner cone, 2 s tan(theta_rv).
    double inner_diameter() const;
    /// Largest admissible spray coefficient, V_c / V_rc = (tan theta / tan theta_rv)^2.
    double max_gamma() const;
};

namespace channel {

/// Fraction of emitted mass inside the inner cone, (tan theta_rv / tan theta)^2 * gamma.
/// Throws BoundsError unless 1 <= gamma <= geom.max_gamma().
double scaling_factor(const ConeGeometry& geom, double gamma);

/// Initial droplet concentration in the reception volume, 3 Q Te rho_d gamma / (pi s^3 tan^2 theta).
double initial_concentration(const TransmitterSpec& tx, double s);

/// End-to-end impulse response E_out(t) in volts, t measured from the end of propagation.
/// Defined as its limit 0 V where the adhered concentration vanishes (t = 0, t -> inf).
double impulse_response(const TransmitterSpec& tx, const KineticsParams& kin, const SensorSpec& sensor,
                        double s, double t);

/// impulse_response on every time stamp. Parameters are echoed into the trace metadata.
Trace sample_response(const TransmitterSpec& tx, const KineticsParams& kin, const SensorSpec& sensor,
                      double s, std::span<const double> times);

/// Uniform grid 0, dt, ..., up to and including t_end (within dt * 1e-9).
std::vector<double> uniform_grid(double t_end, double dt);

} // namespace channel
} // namespace macromc
