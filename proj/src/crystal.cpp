#include "pfsim/crystal.hpp"

#include <cmath>
#include <stdexcept>

#include "pfsim/constants.hpp"

namespace pfsim {

bool UniaxialCrystal::finite_transverse() const {
    return std::isfinite(width_x) || std::isfinite(width_y);
}

void UniaxialCrystal::validate() const {
    if (!(length_z > 0.0)) throw std::invalid_argument("crystal: length_z must be > 0");
    if (!(width_x > 0.0) || !(width_y > 0.0))
        throw std::invalid_argument("crystal: transverse widths must be > 0");
}

double longitudinal_k(double omega, double kx, double ky, Polarization pol,
                      const SellmeierCoefficients& material) {
    double lambda = wavelength_from_omega(omega);
    double k0 = omega / c_light;
    double rad;
    if (pol == Polarization::ordinary) {
        double n_o = index_ordinary(material, lambda);
        rad = n_o * n_o * k0 * k0 - kx * kx - ky * ky;
    } else {
        double lam_um = lambda * 1e6;
        double no2 = material.ordinary.index_squared(lam_um);
        double ne2 = material.extraordinary.index_squared(lam_um);
        index_ordinary(material, lambda);  // range check
        rad = ne2 * (k0 * k0 - ky * ky / no2) - kx * kx;
    }
    if (rad <= 0.0) throw std::domain_error("longitudinal_k: evanescent mode rejected");
    return std::sqrt(rad);
}

PlaneWaveMode make_mode(double omega, double kx, double ky, Polarization pol,
                        const SellmeierCoefficients& material) {
    PlaneWaveMode m;
    m.omega = omega;
    m.kx = kx;
    m.ky = ky;
    m.pol = pol;
    m.kz = longitudinal_k(omega, kx, ky, pol, material);
    return m;
}

double dispersion_residual(const PlaneWaveMode& mode, const SellmeierCoefficients& material) {
    double lambda = wavelength_from_omega(mode.omega);
    double k0 = mode.omega / c_light;
    double lam_um = lambda * 1e6;
    double no2 = material.ordinary.index_squared(lam_um);
    if (mode.pol == Polarization::ordinary) {
        double lhs = mode.kx * mode.kx + mode.ky * mode.ky + mode.kz * mode.kz;
        double rhs = no2 * k0 * k0;
        return std::abs(lhs - rhs) / rhs;
    }
    double ne2 = material.extraordinary.index_squared(lam_um);
    double lhs = mode.ky * mode.ky / no2 + (mode.kx * mode.kx + mode.kz * mode.kz) / ne2;
    double rhs = k0 * k0;
    return std::abs(lhs - rhs) / rhs;
}

std::array<double, 3> phase_mismatch(const PlaneWaveMode& pump, const PlaneWaveMode& signal,
                                     const PlaneWaveMode& idler) {
    return {pump.kx - signal.kx - idler.kx, pump.ky - signal.ky - idler.ky,
            pump.kz - signal.kz - idler.kz};
}

double external_angle(double theta_internal, double n_internal) {
    double s = n_internal * std::sin(theta_internal);
    if (s > 1.0) throw std::domain_error("external_angle: total internal reflection");
    return std::asin(s);
}

double internal_angle(double theta_external, double n_internal) {
    return std::asin(std::sin(theta_external) / n_internal);
}

ConeSolution cone_solve(double pump_lambda_m, double signal_lambda_m,
                        const UniaxialCrystal& crystal) {
    if (!(signal_lambda_m > pump_lambda_m))
        throw std::invalid_argument("cone_solve: energy conservation needs lambda_s > lambda_p");
    const SellmeierCoefficients& mat = crystal.material;
    double omega_p = omega_from_wavelength(pump_lambda_m);
    double omega_s = omega_from_wavelength(signal_lambda_m);
    double omega_i = omega_p - omega_s;
    double idler_lambda = wavelength_from_omega(omega_i);

    // on-axis extraordinary pump sees the principal extraordinary index
    double kp = index_extraordinary_principal(mat, pump_lambda_m) * omega_p / c_light;
    double ks = index_ordinary(mat, signal_lambda_m) * omega_s / c_light;
    double ki = index_ordinary(mat, idler_lambda) * omega_i / c_light;

    // f(q) = kp - sqrt(ks^2-q^2) - sqrt(ki^2-q^2), monotone increasing in q
    auto f = [&](double q) {
        return kp - std::sqrt(ks * ks - q * q) - std::sqrt(ki * ki - q * q);
    };

    ConeSolution sol;
    double f0 = f(0.0);
    if (f0 > 0.0) {
        sol.residual = f0;  // pump k too large even collinearly
        return sol;
    }
    if (f0 == 0.0) {
        sol.matchable = true;
        return sol;
    }
    double qmax = 0.999999 * std::min(ks, ki);
    if (f(qmax) < 0.0) {
        sol.residual = f(qmax);
        return sol;
    }
    double lo = 0.0, hi = qmax;
    for (int iter = 0; iter < 200; ++iter) {
        double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
    }
    double q = 0.5 * (lo + hi);
    sol.matchable = true;
    sol.theta_internal = std::asin(q / ks);
    // tangential continuity: sin(th_ext) = q / (omega_s / c)
    sol.theta_external = std::asin(q * c_light / omega_s);
    return sol;
}

}  // namespace pfsim
