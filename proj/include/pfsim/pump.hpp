#pragma once

#include <complex>
#include <vector>

namespace pfsim {

// All widths follow the 1/e-of-maximum half-width convention;
// spectral peak widths refer to intensity, beam waists to field amplitude.

struct SpectralPeak {
    double amplitude = 0.0;  // intensity peak height, arb. units
    double center_m = 0.0;   // wavelength
    double width_m = 0.0;    // 1/e intensity half-width
};

enum class PumpRegime { cw, pulsed };

struct PumpSpectrum {
    std::vector<SpectralPeak> peaks;
    PumpRegime regime = PumpRegime::cw;
    double center_wavelength_m = 0.0;

    void validate() const;
};

struct PumpAngularSpectrum {
    double waist_x = 0.0;        // m, 1/e field half-width at waist
    double waist_y = 0.0;        // m
    double waist_offset_z = 0.0; // waist position relative to crystal centre
};

struct PumpBeam {
    PumpSpectrum spectrum;
    PumpAngularSpectrum angular;
    double pairs_per_gate = 0.0;  // simulation-only scaling
};

// sqrt of the summed peak intensities at omega, flat spectral phase
double spectral_amplitude(const PumpSpectrum& spectrum, double omega);

// elliptical Gaussian in transverse k, quadratic phase from the waist offset
std::complex<double> angular_amplitude(const PumpAngularSpectrum& angular, double kx, double ky,
                                       double kp0);

// waist from the measured focal-plane spot of lens L3: W0 = f lambda / (pi w_f)
double waist_from_focal_image(double focal_spot_halfwidth_m, double focal_length_m,
                              double lambda_m);

// intensity of the spectrum at a wavelength, used by diagnostics and the fitter
double spectral_intensity(const PumpSpectrum& spectrum, double lambda_m);

}  // namespace pfsim
