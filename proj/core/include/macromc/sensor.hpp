#pragma once

#include <filesystem>
#include <vector>

namespace macromc {

/// Coefficients of the power-law sensitivity curve R_S/R_o = a * B^b + c.
struct SensitivityCoeffs {
    double a = 0.0116;
    double b = -0.5855;
    double c = -0.0743;

    /// Requires a > 0, b < 0 and a positive curve over the detection scope.
    void validate() const;
};

/// Measurement circuit of the metal-oxide sensor: supply Ein (V), load RL and
/// reference resistance Ro (Ohm, the sensor resistance at 0.0004 kg/m^3).
struct SensorSpec {
    double Ein = 5.0;
    double RL = 1000.0;
    double Ro = 24000.0;
    SensitivityCoeffs sens;

    void validate() const;
};

/// Concentration points of a sensitivity characteristic.
struct SensitivityTable {
    std::vector<double> concentration; ///< kg/m^3
    std::vector<double> ratio;         ///< R_S/R_o
};

namespace sensor {

/// Lower and upper edge of the sensor's detection scope, kg/m^3.
inline constexpr double kDetectionMin = 5e-5;
inline constexpr double kDetectionMax = 1e-2;
/// Concentration at which Ro is defined.
inline constexpr double kReferenceConcentration = 4e-4;

constexpr bool within_detection_scope(double B)
{
    return B >= kDetectionMin && B <= kDetectionMax;
}

/// R_S/R_o = a * B^b + c. Throws DomainError for B <= 0.
double sensitivity(double B, const SensitivityCoeffs& sens);

/// R_S = (Ein/Eout - 1) RL. Requires 0 < Eout < Ein.
double resistance_from_voltage(double Eout, const SensorSpec& spec);

/// Inverse of resistance_from_voltage: Eout = Ein RL / (RL + R_S).
double voltage_from_resistance(double Rs, const SensorSpec& spec);

/// Eout = Ein RL / (RL + Ro * ratio). Requires ratio > 0.
double voltage_from_sensitivity(double ratio, const SensorSpec& spec);

/// Concentration implied by a voltage reading through the circuit and the power law.
/// Throws OutOfCalibrationError when the implied ratio is at or below c.
double concentration_from_voltage(double Eout, const SensorSpec& spec);

/// Direct concentration -> voltage map. Returns NaN where the curve is non-positive.
double voltage_from_concentration_unchecked(double B, const SensorSpec& spec) noexcept;

/// Reads `concentration_kg_m3,rs_over_ro` CSV; `#` lines are comments.
SensitivityTable load_sensitivity_table(const std::filesystem::path& path);

} // namespace sensor
} // namespace macromc
