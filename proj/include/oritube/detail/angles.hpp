#pragma once

#include <cmath>
#include <numbers>
#include <utility>

namespace oritube::detail {

inline double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// (cos, sin) of an angle in degrees, exact at multiples of 90.
inline std::pair<double, double> cos_sin_deg(double deg) {
    const double q = deg / 90.0;
    if (q == std::round(q)) {
        switch (((static_cast<long long>(std::round(q)) % 4) + 4) % 4) {
            case 0: return {1.0, 0.0};
            case 1: return {0.0, 1.0};
            case 2: return {-1.0, 0.0};
            default: return {0.0, -1.0};
        }
    }
    const double r = deg2rad(deg);
    return {std::cos(r), std::sin(r)};
}

/// Wraps an angle difference into (-pi, pi].
inline double wrap_pi(double a) {
    a = std::remainder(a, 2.0 * std::numbers::pi);
    if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
    return a;
}

}  // namespace oritube::detail
