#include "macromc/calibration.hpp"

#include "csv.hpp"
#include "macromc/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace macromc {

void MassMeasurement::validate() const
{
    if (!(std::isfinite(mass_before) && std::isfinite(mass_after) && mass_after >= 0.0)) {
        throw ValidationError("MassMeasurement: masses must be finite and >= 0");
    }
    if (!(mass_before > mass_after)) {
        throw ValidationError("MassMeasurement: mass difference must be positive");
    }
    if (!(std::isfinite(dt) && dt > 0.0)) {
        throw ValidationError("MassMeasurement: spray interval must be > 0");
    }
}

namespace calibration {

FlowRateReport flow_rate(const std::vector<MassMeasurement>& measurements, double rho_d)
{
    if (measurements.empty()) {
        throw InsufficientDataError("flow_rate: no measurements");
    }
    if (!(std::isfinite(rho_d) && rho_d > 0.0)) {
        throw DomainError("flow_rate: density must be > 0");
    }
    FlowRateReport report;
    for (const auto& m : measurements) {
        m.validate();
        const double volume = (m.mass_before - m.mass_after) / rho_d;
        report.per_measurement.push_back(volume / m.dt);
    }
    // summed in sorted order so the mean does not depend on measurement order
    std::vector<double> q = report.per_measurement;
    std::sort(q.begin(), q.end());
    const auto n = static_cast<double>(q.size());
    report.mean = std::accumulate(q.begin(), q.end(), 0.0) / n;
    if (q.size() > 1) {
        double ss = 0.0;
        for (const double x : q) {
            ss += (x - report.mean) * (x - report.mean);
        }
        report.stddev = std::sqrt(ss / (n - 1.0));
    }
    return report;
}

double reference_resistance(double Eout_ref, double Ein, double RL)
{
    SensorSpec circuit;
    circuit.Ein = Ein;
    circuit.RL = RL;
    return sensor::resistance_from_voltage(Eout_ref, circuit);
}

std::vector<MassMeasurement> load_measurements(const std::filesystem::path& path)
{
    const auto doc = detail::read_numeric_csv(path, {"mass_before_kg", "mass_after_kg", "dt_s"});
    std::vector<MassMeasurement> out;
    out.reserve(doc.rows.size());
    for (const auto& row : doc.rows) {
        out.push_back({row.values[0], row.values[1], row.values[2]});
    }
    return out;
}

} // namespace calibration
} // namespace macromc
