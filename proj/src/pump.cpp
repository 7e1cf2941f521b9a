#include "pfsim/pump.hpp"

#include <cmath>
#include <stdexcept>

#include "pfsim/constants.hpp"

namespace pfsim {

void PumpSpectrum::validate() const {
    if (peaks.empty()) throw std::invalid_argument("pump spectrum: at least one peak required");
    for (const auto& p : peaks) {
        if (p.amplitude < 0.0) throw std::invalid_argument("pump spectrum: negative peak amplitude");
        if (!(p.width_m > 0.0)) throw std::invalid_argument("pump spectrum: peak width must be > 0");
    }
    if (!(center_wavelength_m > 0.0))
        throw std::invalid_argument("pump spectrum: center wavelength must be > 0");
}

double spectral_intensity(const PumpSpectrum& spectrum, double lambda_m) {
    double total = 0.0;
    for (const auto& p : spectrum.peaks) {
        double u = (lambda_m - p.center_m) / p.width_m;
        total += p.amplitude * std::exp(-u * u);
    }
    return total;
}

double spectral_amplitude(const PumpSpectrum& spectrum, double omega) {
    if (omega <= 0.0) return 0.0;
    return std::sqrt(spectral_intensity(spectrum, wavelength_from_omega(omega)));
}

std::complex<double> angular_amplitude(const PumpAngularSpectrum& angular, double kx, double ky,
                                       double kp0) {
    double mag = std::exp(-(kx * kx * angular.waist_x * angular.waist_x +
                            ky * ky * angular.waist_y * angular.waist_y) / 4.0);
    if (angular.waist_offset_z == 0.0) return {mag, 0.0};
    double phase = -angular.waist_offset_z * (kx * kx + ky * ky) / (2.0 * kp0);
    return std::polar(mag, phase);
}

double waist_from_focal_image(double focal_spot_halfwidth_m, double focal_length_m,
                              double lambda_m) {
    if (!(focal_spot_halfwidth_m > 0.0) || !(focal_length_m > 0.0) || !(lambda_m > 0.0))
        throw std::invalid_argument("waist_from_focal_image: inputs must be > 0");
    return focal_length_m * lambda_m / (pi * focal_spot_halfwidth_m);
}

}  // namespace pfsim
