#pragma once

#include <cmath>

namespace stemnorm {

inline constexpr double kDefaultDbFloor = -120.0;

[[nodiscard]] inline double db_to_linear(double db) noexcept { return std::pow(10.0, db / 20.0); }

/// 20*log10(x), clamped at `floor_db`. Non-positive input maps to the floor.
[[nodiscard]] inline double linear_to_db(double x, double floor_db = kDefaultDbFloor) noexcept {
    if (!(x > 0.0)) {
        return floor_db;
    }
    const double db = 20.0 * std::log10(x);
    return db < floor_db ? floor_db : db;
}

/// 10*log10 for power quantities, same clamping rule.
[[nodiscard]] inline double power_to_db(double p, double floor_db = kDefaultDbFloor) noexcept {
    if (!(p > 0.0)) {
        return floor_db;
    }
    const double db = 10.0 * std::log10(p);
    return db < floor_db ? floor_db : db;
}

}  // namespace stemnorm
