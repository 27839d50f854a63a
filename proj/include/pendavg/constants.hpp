#pragma once

#include <cmath>
#include <numbers>

namespace pendavg::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double sqrt2 = std::numbers::sqrt2;

// Normal-mode frequencies of the rescaled linear pendulum, sqrt(2 -+ sqrt(2)).
inline const double omega1 = std::sqrt(2.0 - sqrt2);
inline const double omega2 = std::sqrt(2.0 + sqrt2);

inline const double period1 = 2.0 * pi / omega1;
inline const double period2 = 2.0 * pi / omega2;

}  // namespace pendavg::constants
