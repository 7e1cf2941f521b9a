#pragma once

#include <array>
#include <limits>

#include "pfsim/sellmeier.hpp"

namespace pfsim {

enum class Polarization { ordinary, extraordinary };

// Crystal cut: propagation along z, optic axis along y (non-critical).
struct UniaxialCrystal {
    SellmeierCoefficients material;
    double length_z = 0.0;  // m
    double width_x = std::numeric_limits<double>::infinity();
    double width_y = std::numeric_limits<double>::infinity();

    bool finite_transverse() const;
    void validate() const;  // throws std::invalid_argument
};

struct PlaneWaveMode {
    double omega = 0.0;  // rad/s
    double kx = 0.0;     // rad/m
    double ky = 0.0;
    double kz = 0.0;  // derived, always the +z branch
    Polarization pol = Polarization::ordinary;
};

// kz of a forward-propagating mode. Ordinary: sphere of radius n_o w/c.
// Extraordinary (optic axis y): kz = sqrt(n_e^2 [(w/c)^2 - ky^2/n_o^2] - kx^2).
// Evanescent transverse components throw std::domain_error.
double longitudinal_k(double omega, double kx, double ky, Polarization pol,
                      const SellmeierCoefficients& material);

PlaneWaveMode make_mode(double omega, double kx, double ky, Polarization pol,
                        const SellmeierCoefficients& material);

// residual of the normal-surface relation, relative; ~0 for a valid mode
double dispersion_residual(const PlaneWaveMode& mode, const SellmeierCoefficients& material);

// dk = k_p - k_s - k_i, componentwise (x, y, z)
std::array<double, 3> phase_mismatch(const PlaneWaveMode& pump, const PlaneWaveMode& signal,
                                     const PlaneWaveMode& idler);

struct ConeSolution {
    bool matchable = false;
    double residual = 0.0;        // collinear longitudinal mismatch (rad/m) when unmatchable
    double theta_internal = 0.0;  // signal polar angle inside the crystal (rad)
    double theta_external = 0.0;  // after refraction at the planar exit face (rad)
};

// Degenerate-or-not emission angle for an on-axis extraordinary pump:
// solves k_pz = k_sz + k_iz with k_s_perp = -k_i_perp for ordinary daughters.
// theta_external is the half-opening (apex) angle of the emission cone.
ConeSolution cone_solve(double pump_lambda_m, double signal_lambda_m,
                        const UniaxialCrystal& crystal);

// refraction at the planar exit face (normal along z, tangential k continuous)
double external_angle(double theta_internal, double n_internal);
double internal_angle(double theta_external, double n_internal);

}  // namespace pfsim
