#pragma once

#include <string>

namespace pfsim {

// Principal-index dispersion of a uniaxial crystal,
// n^2 = A + B / (lambda^2 - C) - D * lambda^2  with lambda in micrometres.
struct SellmeierBranch {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;

    double index_squared(double lambda_um) const {
        double l2 = lambda_um * lambda_um;
        return a + b / (l2 - c) - d * l2;
    }
};

struct SellmeierCoefficients {
    std::string material;
    SellmeierBranch ordinary;
    SellmeierBranch extraordinary;
    double lambda_min_m = 0.0;  // validity range
    double lambda_max_m = 0.0;
    std::string citation;

    // Throws std::runtime_error when the declared validity range yields
    // non-physical indices or a non-negative-uniaxial ordering.
    void validate() const;
};

// dispersion data file: "key = value" lines, '#' comments
SellmeierCoefficients load_sellmeier_file(const std::string& path);

// evaluated principal indices; out-of-range wavelength throws std::out_of_range
double index_ordinary(const SellmeierCoefficients& material, double lambda_m);
double index_extraordinary_principal(const SellmeierCoefficients& material, double lambda_m);

// direction-dependent extraordinary index, theta measured from the optic axis
double index_extraordinary(const SellmeierCoefficients& material, double lambda_m, double theta_rad);

// constant-index stand-in used by tests (no dispersion, n_e == n_o allowed)
SellmeierCoefficients constant_index_material(double n_o, double n_e);

}  // namespace pfsim
