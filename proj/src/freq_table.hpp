#pragma once

// Internal: pre-tabulated per-frequency constants shared by the map quadrature
// and the Monte Carlo density table. Not installed.

#include <cmath>
#include <utility>
#include <vector>

#include "pfsim/biphoton.hpp"
#include "pfsim/constants.hpp"
#include "pfsim/correlation.hpp"
#include "pfsim/quadrature.hpp"

namespace pfsim::detail {

struct FreqNode {
    double omega_s, omega_i;
    double ks, ki;    // n_o * omega / c
    double k0s, k0i;  // omega / c (external)
    double pump_no2, pump_ne2, pump_k0sq;
    double aspec2_det2_w;  // |A_spec|^2 * d_s^2 * d_i^2 * quadrature weight
    double freq_w;         // bare quadrature weight
};

struct FreqTable {
    std::vector<FreqNode> nodes;
};

std::pair<double, double> pump_support_lambda(const PumpSpectrum& sp);

FreqTable build_freq_table(const BiphotonConfig& config, const DetectorModel& det,
                           const AngularGrid& grid, int pump_freq_nodes);

// |S|^2 d^2 at external angles and frequencies, dispersion evaluated on the fly
double point_density(const BiphotonConfig& config, const DetectorModel& det,
                     const EmissionGeometry& geom, double gs, double bs, double gi, double bi,
                     double omega_s, double omega_p);

// Frequency integral of |S|^2 d^2 at fixed angles. The signal-frequency window
// is re-centered per angle configuration on the transverse pump-conservation
// ridge (k_px varies linearly in omega_s at fixed directions), which the fixed
// detector-window Gauss-Legendre grid cannot resolve.
struct FreqKernel {
    const BiphotonConfig* config = nullptr;
    const DetectorModel* det = nullptr;
    EmissionGeometry geom;
    double ws_lo = 0.0, ws_hi = 0.0;  // signal window (detector side)
    MappedRule pump_rule;             // omega_p over the pump spectral support
    int ws_nodes = 6;
    double kappa_x = 0.0;  // pump k_x support half-width (5 intensity 1/e widths)

    double density(double gs, double bs, double gi, double bi) const;
};

FreqKernel make_freq_kernel(const BiphotonConfig& config, const DetectorModel& det,
                            const EmissionGeometry& geom, const AngularGrid& grid,
                            int pump_freq_nodes);

// pump transverse k support half-widths; finite faces widen the acceptance by
// the transverse sinc scale
double pump_kappa_x(const BiphotonConfig& config);
double pump_kappa_y(const BiphotonConfig& config);

// delta-conservation |S|^2 * d^2 at external angles, dispersion pre-tabulated.
// envelope: replace the oscillating sinc^2 tail by its local mean 1/(2x^2), so
// sparse tail panels integrate the decay instead of sampling random phases
inline double fast_integrand(const BiphotonConfig& config, const EmissionGeometry& geom,
                             const FreqNode& f, double gs, double bs, double gi, double bi,
                             bool envelope = false) {
    double ksx = f.k0s * std::sin(geom.signal_center_gamma + gs);
    double ksy = f.k0s * std::sin(bs);
    double kix = f.k0i * std::sin(geom.idler_center_gamma + gi);
    double kiy = f.k0i * std::sin(bi);
    double ksz2 = f.ks * f.ks - ksx * ksx - ksy * ksy;
    double kiz2 = f.ki * f.ki - kix * kix - kiy * kiy;
    if (ksz2 <= 0.0 || kiz2 <= 0.0) return 0.0;
    double kpx = ksx + kix, kpy = ksy + kiy;
    double kpz2 = f.pump_ne2 * (f.pump_k0sq - kpy * kpy / f.pump_no2) - kpx * kpx;
    if (kpz2 <= 0.0) return 0.0;
    double dkz = std::sqrt(kpz2) - std::sqrt(ksz2) - std::sqrt(kiz2);
    const auto& ang = config.pump.angular;
    double pump2 = std::exp(-(kpx * kpx * ang.waist_x * ang.waist_x +
                              kpy * kpy * ang.waist_y * ang.waist_y) / 2.0);
    double lz = config.crystal.length_z;
    double x = 0.5 * dkz * lz;
    double s2;
    if (envelope && std::abs(x) >= pi) {
        s2 = lz * lz * 0.5 / (x * x);
    } else {
        double s = lz * sinc(x);
        s2 = s * s;
    }
    double cn = config.normalization;
    return cn * cn * f.aspec2_det2_w * pump2 * s2;
}

}  // namespace pfsim::detail
