#include "macromc/kinetics.hpp"

#include "macromc/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace macromc {

void KineticsParams::validate() const
{
    if (!(std::isfinite(k1) && k1 > 0.0)) {
        throw ValidationError("KineticsParams: k1 must be finite and > 0, got " + std::to_string(k1));
    }
    if (!(std::isfinite(k2) && k2 > 0.0)) {
        throw ValidationError("KineticsParams: k2 must be finite and > 0, got " + std::to_string(k2));
    }
}

namespace kinetics {

namespace {

void check_inputs(double C0, const KineticsParams& kin, double t)
{
    kin.validate();
    if (!(C0 >= 0.0) || !std::isfinite(C0)) {
        throw DomainError("kinetics: C0 must be finite and >= 0");
    }
    if (!(t >= 0.0)) {
        throw DomainError("kinetics: t must be >= 0");
    }
}

} // namespace

double free_concentration(double C0, const KineticsParams& kin, double t)
{
    check_inputs(C0, kin, t);
    return C0 * std::exp(-kin.k1 * t);
}

double bound_concentration_unchecked(double C0, double k1, double k2, double t) noexcept
{
    const double kmin = std::min(k1, k2);
    const double gap = std::max(k1, k2) - kmin;
    // (1 - e^{-gap t}) / gap, which tends to t as gap -> 0.
    const double window = gap > 0.0 ? -std::expm1(-gap * t) / gap : t;
    return k1 * C0 * std::exp(-kmin * t) * window;
}

double bound_concentration(double C0, const KineticsParams& kin, double t)
{
    check_inputs(C0, kin, t);
    if (std::isinf(t)) {
        return 0.0;
    }
    return bound_concentration_unchecked(C0, kin.k1, kin.k2, t);
}

double peak_time(const KineticsParams& kin)
{
    kin.validate();
    const double kmin = std::min(kin.k1, kin.k2);
    const double gap = std::max(kin.k1, kin.k2) - kmin;
    if (gap == 0.0) {
        return 1.0 / kmin;
    }
    return std::log1p(gap / kmin) / gap;
}

void integrate_kinetics(double C0, const KineticsParams& kin, double t_end, double dt,
                        const KineticsObserver& observer)
{
    kin.validate();
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw DomainError("integrate_kinetics: dt must be finite and > 0");
    }
    if (!(t_end > 0.0) || !std::isfinite(t_end)) {
        throw DomainError("integrate_kinetics: t_end must be finite and > 0");
    }
    if (dt > t_end) {
        throw DomainError("integrate_kinetics: dt must not exceed t_end");
    }
    if (!(C0 >= 0.0) || !std::isfinite(C0)) {
        throw DomainError("integrate_kinetics: C0 must be finite and >= 0");
    }

    const double k1 = kin.k1;
    const double k2 = kin.k2;
    struct Rates {
        double dC, dB, dZ;
    };
    auto rates = [k1, k2](double C, double B) {
        return Rates{-k1 * C, k1 * C - k2 * B, k2 * B};
    };

    KineticsState s{0.0, C0, 0.0, 0.0};
    observer(s);

    const auto steps = static_cast<long long>(std::ceil(t_end / dt - 1e-9));
    for (long long n = 0; n < steps; ++n) {
        const double t0 = static_cast<double>(n) * dt;
        const double h = (n + 1 == steps) ? t_end - t0 : dt;

        const Rates r1 = rates(s.C, s.B);
        const Rates r2 = rates(s.C + 0.5 * h * r1.dC, s.B + 0.5 * h * r1.dB);
        const Rates r3 = rates(s.C + 0.5 * h * r2.dC, s.B + 0.5 * h * r2.dB);
        const Rates r4 = rates(s.C + h * r3.dC, s.B + h * r3.dB);

        s.C += h / 6.0 * (r1.dC + 2.0 * r2.dC + 2.0 * r3.dC + r4.dC);
        s.B += h / 6.0 * (r1.dB + 2.0 * r2.dB + 2.0 * r3.dB + r4.dB);
        s.Z += h / 6.0 * (r1.dZ + 2.0 * r2.dZ + 2.0 * r3.dZ + r4.dZ);
        s.t = (n + 1 == steps) ? t_end : static_cast<double>(n + 1) * dt;
        observer(s);
    }
}

std::vector<KineticsState> solve_kinetics_numeric(double C0, const KineticsParams& kin, double t_end,
                                                  double dt, std::size_t stride)
{
    if (stride == 0) {
        throw DomainError("solve_kinetics_numeric: stride must be >= 1");
    }
    std::vector<KineticsState> out;
    std::size_t index = 0;
    KineticsState last;
    integrate_kinetics(C0, kin, t_end, dt, [&](const KineticsState& s) {
        if (index++ % stride == 0) {
            out.push_back(s);
        }
        last = s;
    });
    if (out.back().t != last.t) {
        out.push_back(last);
    }
    return out;
}

} // namespace kinetics
} // namespace macromc
