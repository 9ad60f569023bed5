#include "macromc/sensor.hpp"

#include "csv.hpp"
#include "macromc/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace macromc {

void SensitivityCoeffs::validate() const
{
    if (!(std::isfinite(a) && a > 0.0)) {
        throw ValidationError("SensitivityCoeffs: a must be finite and > 0");
    }
    if (!(std::isfinite(b) && b < 0.0)) {
        throw ValidationError("SensitivityCoeffs: b must be finite and < 0");
    }
    if (!std::isfinite(c)) {
        throw ValidationError("SensitivityCoeffs: c must be finite");
    }
    // decreasing curve, so the minimum over the scope sits at its upper edge
    if (!(a * std::pow(sensor::kDetectionMax, b) + c > 0.0)) {
        throw ValidationError("SensitivityCoeffs: a*B^b + c must be positive over the detection scope");
    }
}

void SensorSpec::validate() const
{
    if (!(std::isfinite(Ein) && Ein > 0.0)) {
        throw ValidationError("SensorSpec: Ein must be finite and > 0");
    }
    if (!(std::isfinite(RL) && RL > 0.0)) {
        throw ValidationError("SensorSpec: RL must be finite and > 0");
    }
    if (!(std::isfinite(Ro) && Ro > 0.0)) {
        throw ValidationError("SensorSpec: Ro must be finite and > 0");
    }
    sens.validate();
}

namespace sensor {

double sensitivity(double B, const SensitivityCoeffs& sens)
{
    if (!(B > 0.0)) {
        throw DomainError("sensitivity: concentration must be > 0, got " + std::to_string(B));
    }
    return sens.a * std::pow(B, sens.b) + sens.c;
}

double resistance_from_voltage(double Eout, const SensorSpec& spec)
{
    if (!(Eout > 0.0 && Eout < spec.Ein)) {
        throw DomainError("resistance_from_voltage: reading " + std::to_string(Eout) +
                          " V outside (0, Ein)");
    }
    return (spec.Ein / Eout - 1.0) * spec.RL;
}

double voltage_from_resistance(double Rs, const SensorSpec& spec)
{
    if (!(Rs > 0.0)) {
        throw DomainError("voltage_from_resistance: resistance must be > 0");
    }
    return spec.Ein * spec.RL / (spec.RL + Rs);
}

double voltage_from_sensitivity(double ratio, const SensorSpec& spec)
{
    if (!(ratio > 0.0)) {
        throw DomainError("voltage_from_sensitivity: ratio must be > 0, got " + std::to_string(ratio));
    }
    if (std::isinf(ratio)) {
        return 0.0;
    }
    return spec.Ein * spec.RL / (spec.Ro * (ratio + spec.RL / spec.Ro));
}

double concentration_from_voltage(double Eout, const SensorSpec& spec)
{
    const double ratio = resistance_from_voltage(Eout, spec) / spec.Ro;
    const double excess = ratio - spec.sens.c;
    if (!(excess > 0.0)) {
        throw OutOfCalibrationError("concentration_from_voltage: ratio " + std::to_string(ratio) +
                                    " at or below the curve offset c; reading beyond the power-law range");
    }
    return std::pow(excess / spec.sens.a, 1.0 / spec.sens.b);
}

double voltage_from_concentration_unchecked(double B, const SensorSpec& spec) noexcept
{
    if (B <= 0.0) {
        return 0.0;
    }
    const double ratio = spec.sens.a * std::pow(B, spec.sens.b) + spec.sens.c;
    if (!(ratio > 0.0)) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return spec.Ein * spec.RL / (spec.Ro * (ratio + spec.RL / spec.Ro));
}

SensitivityTable load_sensitivity_table(const std::filesystem::path& path)
{
    const auto doc = detail::read_numeric_csv(path, {"concentration_kg_m3", "rs_over_ro"});
    SensitivityTable table;
    for (const auto& row : doc.rows) {
        table.concentration.push_back(row.values[0]);
        table.ratio.push_back(row.values[1]);
    }
    return table;
}

} // namespace sensor
} // namespace macromc
