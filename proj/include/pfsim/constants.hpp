#pragma once

#include <cmath>

namespace pfsim {

constexpr double c_light = 299792458.0;  // m/s
constexpr double pi = 3.14159265358979323846;

// angular frequency <-> vacuum wavelength
inline double omega_from_wavelength(double lambda_m) { return 2.0 * pi * c_light / lambda_m; }
inline double wavelength_from_omega(double omega) { return 2.0 * pi * c_light / omega; }

// sin(x)/x with the removable singularity expanded for small arguments
inline double sinc(double x) {
    double ax = x < 0 ? -x : x;
    if (ax < 1e-4) {
        double x2 = x * x;
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
    }
    return std::sin(x) / x;
}

}  // namespace pfsim
