#pragma once

#include <complex>

#include "pfsim/crystal.hpp"
#include "pfsim/pump.hpp"

namespace pfsim {

enum class TransverseMode {
    delta_conservation,  // crystal cross-section >> beam; pump spectrum sampled at k_s + k_i
    finite_sinc          // finite L_x, L_y sinc factors, pump plane-wave integral numeric
};

struct BiphotonConfig {
    UniaxialCrystal crystal;
    PumpBeam pump;
    TransverseMode mode = TransverseMode::delta_conservation;
    double normalization = 1.0;  // C_n, arbitrary
    int pump_transverse_panels = 24;  // composite-rule panels per axis, finite_sinc only

    double pump_center_k() const;  // on-axis extraordinary k at the nominal pump wavelength
};

struct ModePair {
    PlaneWaveMode signal;  // ordinary
    PlaneWaveMode idler;   // ordinary
};

// Two-photon emission amplitude for the pair; evanescent pump components give 0.
std::complex<double> biphoton_amplitude(const BiphotonConfig& config, const ModePair& pair);

double joint_intensity(const BiphotonConfig& config, const ModePair& pair);

}  // namespace pfsim
