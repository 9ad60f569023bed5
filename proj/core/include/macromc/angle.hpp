#pragma once

#include <numbers>

namespace macromc {

/// Plane angle stored in radians. Degrees appear only at I/O boundaries.
class Angle {
public:
    constexpr Angle() = default;

    static constexpr Angle radians(double value) { return Angle(value); }
    static constexpr Angle degrees(double value) { return Angle(value * std::numbers::pi / 180.0); }

    constexpr double radians() const { return radians_; }
    constexpr double degrees() const { return radians_ * 180.0 / std::numbers::pi; }

    friend constexpr auto operator<=>(const Angle&, const Angle&) = default;

private:
    explicit constexpr Angle(double value) : radians_(value) {}

    double radians_ = 0.0;
};

} // namespace macromc
