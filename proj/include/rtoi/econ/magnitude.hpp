#pragma once

namespace rtoi::econ {

inline constexpr double kWeeksPerYear = 52.0;

// Return difference implied by moving the regressor across its interquartile
// range, in percent per week and per year.
struct Magnitude {
    double weekly_pct = 0;
    double annual_pct = 0;
};

inline Magnitude economic_magnitude(double coefficient, double iqr) {
    const double weekly = coefficient * iqr * 100.0;
    return {weekly, weekly * kWeeksPerYear};
}

}  // namespace rtoi::econ
