#pragma once

#include "macromc/sensor.hpp"

#include <filesystem>
#include <vector>

namespace macromc {

/// One weighing of the sprayer around a spray burst of `dt` seconds. Masses in kg.
struct MassMeasurement {
    double mass_before = 0.0;
    double mass_after = 0.0;
    double dt = 0.0;

    void validate() const;
};

struct FlowRateReport {
    double mean = 0.0;   ///< m^3/s
    double stddev = 0.0; ///< sample standard deviation, 0 for one measurement
    std::vector<double> per_measurement;
};

namespace calibration {

/// Volumetric flow rate averaged over measurements: ((before - after) / rho_d) / dt.
FlowRateReport flow_rate(const std::vector<MassMeasurement>& measurements, double rho_d);

/// Ro from the reading at the reference concentration. The sensor maps its detection
/// scope linearly onto 0..Ein, which places 0.0004 kg/m^3 at 0.2 V for a 5 V supply.
double reference_resistance(double Eout_ref, double Ein, double RL);

/// Reads `mass_before_kg,mass_after_kg,dt_s` CSV.
std::vector<MassMeasurement> load_measurements(const std::filesystem::path& path);

} // namespace calibration
} // namespace macromc
