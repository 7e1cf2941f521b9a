#include "pfsim/biphoton.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pfsim/constants.hpp"
#include "pfsim/quadrature.hpp"

namespace pfsim {

double BiphotonConfig::pump_center_k() const {
    double lam = pump.spectrum.center_wavelength_m;
    return index_extraordinary_principal(crystal.material, lam) * omega_from_wavelength(lam) /
           c_light;
}

namespace {

// pump kz or a negative value when evanescent
double pump_kz_or_negative(const SellmeierCoefficients& mat, double omega, double kx, double ky) {
    double lam_um = wavelength_from_omega(omega) * 1e6;
    double no2 = mat.ordinary.index_squared(lam_um);
    double ne2 = mat.extraordinary.index_squared(lam_um);
    double k0 = omega / c_light;
    double rad = ne2 * (k0 * k0 - ky * ky / no2) - kx * kx;
    return rad <= 0.0 ? -1.0 : std::sqrt(rad);
}

// composite Gauss-Legendre covering both the pump support and the sinc core
MappedRule transverse_rule(double center_sinc, double pump_halfwidth, double sinc_scale,
                           int panels) {
    double lo = std::min(-6.0 * pump_halfwidth, center_sinc - 10.0 * pi * sinc_scale);
    double hi = std::max(6.0 * pump_halfwidth, center_sinc + 10.0 * pi * sinc_scale);
    double panel = std::min((hi - lo) / panels, 2.0 * pi * sinc_scale);
    int n = std::max(panels, static_cast<int>(std::ceil((hi - lo) / panel)));
    MappedRule rule;
    for (int i = 0; i < n; ++i) {
        MappedRule sub = gauss_legendre_on(lo + (hi - lo) * i / n, lo + (hi - lo) * (i + 1) / n, 4);
        rule.x.insert(rule.x.end(), sub.x.begin(), sub.x.end());
        rule.w.insert(rule.w.end(), sub.w.begin(), sub.w.end());
    }
    return rule;
}

}  // namespace

std::complex<double> biphoton_amplitude(const BiphotonConfig& config, const ModePair& pair) {
    const auto& crystal = config.crystal;
    const auto& mat = crystal.material;

    double omega_p = pair.signal.omega + pair.idler.omega;
    double a_spec = spectral_amplitude(config.pump.spectrum, omega_p);
    if (a_spec == 0.0) return {0.0, 0.0};

    double ksum_x = pair.signal.kx + pair.idler.kx;
    double ksum_y = pair.signal.ky + pair.idler.ky;
    double kz_daughters = pair.signal.kz + pair.idler.kz;
    double lz = crystal.length_z;
    double kp0 = config.pump_center_k();

    if (config.mode == TransverseMode::delta_conservation) {
        double kpz = pump_kz_or_negative(mat, omega_p, ksum_x, ksum_y);
        if (kpz < 0.0) return {0.0, 0.0};
        double dkz = kpz - kz_daughters;
        std::complex<double> a_ang = angular_amplitude(config.pump.angular, ksum_x, ksum_y, kp0);
        return config.normalization * a_spec * a_ang * (lz * sinc(0.5 * dkz * lz));
    }

    // finite_sinc: numeric pump plane-wave integral with transverse sinc factors
    double lx = crystal.width_x, ly = crystal.width_y;
    if (!std::isfinite(lx) || !std::isfinite(ly))
        throw std::invalid_argument("biphoton_amplitude: finite_sinc needs finite L_x, L_y");
    MappedRule rx = transverse_rule(ksum_x, 2.0 / config.pump.angular.waist_x, 2.0 / lx,
                                    config.pump_transverse_panels);
    MappedRule ry = transverse_rule(ksum_y, 2.0 / config.pump.angular.waist_y, 2.0 / ly,
                                    config.pump_transverse_panels);
    std::complex<double> acc{0.0, 0.0};
    for (size_t iy = 0; iy < ry.x.size(); ++iy) {
        double kpy = ry.x[iy];
        double sy = ly * sinc(0.5 * (kpy - ksum_y) * ly);
        for (size_t ix = 0; ix < rx.x.size(); ++ix) {
            double kpx = rx.x[ix];
            double kpz = pump_kz_or_negative(mat, omega_p, kpx, kpy);
            if (kpz < 0.0) continue;
            double sx = lx * sinc(0.5 * (kpx - ksum_x) * lx);
            double sz = lz * sinc(0.5 * (kpz - kz_daughters) * lz);
            acc += rx.w[ix] * ry.w[iy] * sx * sy * sz *
                   angular_amplitude(config.pump.angular, kpx, kpy, kp0);
        }
    }
    return config.normalization * a_spec * acc / (4.0 * pi * pi);
}

double joint_intensity(const BiphotonConfig& config, const ModePair& pair) {
    return std::norm(biphoton_amplitude(config, pair));
}

}  // namespace pfsim
