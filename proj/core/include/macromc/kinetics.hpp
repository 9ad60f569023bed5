#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace macromc {

/// Rate constants of the adhesion/detachment chain X -> Y -> Z, in 1/s.
struct KineticsParams {
    double k1 = 0.0; ///< adhesion
    double k2 = 0.0; ///< detachment

    /// Throws ValidationError unless both rates are finite and positive.
    void validate() const;
};

/// Concentrations (kg/m^3) of free droplets C, adhered complex B and detached Z at time t.
struct KineticsState {
    double t = 0.0;
    double C = 0.0;
    double B = 0.0;
    double Z = 0.0;
};

namespace kinetics {

/// Free-droplet concentration in the reception volume, C0 * exp(-k1 t).
double free_concentration(double C0, const KineticsParams& kin, double t);

/// Adhered-complex concentration B(t) for the chain started at C(0) = C0, B(0) = 0.
///
/// Evaluated as k1 C0 exp(-kmin t) (1 - exp(-(kmax - kmin) t)) / (kmax - kmin), with the
/// bracket taken through expm1. The form is symmetric in (k1, k2) apart from the k1
/// prefactor, never overflows, and reduces to the confluent limit k1 C0 t exp(-k1 t)
/// continuously. The result is never negative.
double bound_concentration(double C0, const KineticsParams& kin, double t);

/// Same as bound_concentration without argument checks. For hot loops that validated once.
double bound_concentration_unchecked(double C0, double k1, double k2, double t) noexcept;

/// Time of the maximum of B(t): ln(k1/k2)/(k1 - k2), or 1/k1 when the rates coincide.
double peak_time(const KineticsParams& kin);

/// Receives each state of a numeric trajectory, including t = 0.
using KineticsObserver = std::function<void(const KineticsState&)>;

/// Classical fixed-step RK4 integration of the rate laws for C, B and the detached
/// amount Z (dZ/dt = k2 B). The last step is shortened to land on t_end exactly.
void integrate_kinetics(double C0, const KineticsParams& kin, double t_end, double dt,
                        const KineticsObserver& observer);

/// Numeric trajectory from t = 0 to t_end. Every `stride`-th state is kept, plus the final one.
std::vector<KineticsState> solve_kinetics_numeric(double C0, const KineticsParams& kin, double t_end,
                                                  double dt, std::size_t stride = 1);

} // namespace kinetics
} // namespace macromc
