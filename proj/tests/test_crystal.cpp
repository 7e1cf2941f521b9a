#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "pfsim/constants.hpp"
#include "pfsim/crystal.hpp"
#include "test_util.hpp"

using namespace pfsim;

TEST_CASE("dispersion data loads and is negative uniaxial") {
    SellmeierCoefficients mat = test_material();
    CHECK(mat.material == "LiIO3");
    double no800 = index_ordinary(mat, 800e-9);
    double ne800 = index_extraordinary_principal(mat, 800e-9);
    CHECK(no800 > ne800);  // negative uniaxial
    CHECK(no800 > 1.7);
    CHECK(no800 < 2.0);
    // normal dispersion
    CHECK(index_ordinary(mat, 400e-9) > no800);
    CHECK_THROWS_AS(index_ordinary(mat, 200e-9), std::out_of_range);
    CHECK_THROWS_AS(index_ordinary(mat, 2e-6), std::out_of_range);
}

TEST_CASE("extraordinary index interpolates between principal values") {
    SellmeierCoefficients mat = test_material();
    double no = index_ordinary(mat, 800e-9);
    double ne = index_extraordinary_principal(mat, 800e-9);
    // along the optic axis the e-ray sees n_o, perpendicular to it n_e
    CHECK(index_extraordinary(mat, 800e-9, 0.0) == doctest::Approx(no).epsilon(1e-12));
    CHECK(index_extraordinary(mat, 800e-9, pi / 2) == doctest::Approx(ne).epsilon(1e-12));
    double mid = index_extraordinary(mat, 800e-9, 0.7);
    CHECK(mid < no);
    CHECK(mid > ne);
}

TEST_CASE("longitudinal k lies on the normal surface") {
    SellmeierCoefficients mat = test_material();
    double omega = omega_from_wavelength(800e-9);
    double k0 = omega / c_light;
    double no = index_ordinary(mat, 800e-9);

    double kx = 0.3 * no * k0, ky = -0.1 * no * k0;
    double kz = longitudinal_k(omega, kx, ky, Polarization::ordinary, mat);
    CHECK(kz > 0.0);
    CHECK(std::sqrt(kx * kx + ky * ky + kz * kz) == doctest::Approx(no * k0).epsilon(1e-12));

    PlaneWaveMode mode = make_mode(omega, kx, ky, Polarization::ordinary, mat);
    CHECK(std::abs(dispersion_residual(mode, mat)) < 1e-10);

    PlaneWaveMode e = make_mode(omega, 0.2 * k0, 0.1 * k0, Polarization::extraordinary, mat);
    CHECK(std::abs(dispersion_residual(e, mat)) < 1e-10);

    CHECK_THROWS_AS(longitudinal_k(omega, 1.1 * no * k0, 0.0, Polarization::ordinary, mat),
                    std::domain_error);
}

TEST_CASE("phase mismatch is the componentwise difference") {
    SellmeierCoefficients mat = test_material();
    double ws = omega_from_wavelength(800e-9);
    double wp = 2.0 * ws;
    PlaneWaveMode pump = make_mode(wp, 0.0, 0.0, Polarization::extraordinary, mat);
    PlaneWaveMode s = make_mode(ws, 1e5, 2e5, Polarization::ordinary, mat);
    PlaneWaveMode i = make_mode(ws, -1e5, -2e5, Polarization::ordinary, mat);
    auto dk = phase_mismatch(pump, s, i);
    CHECK(dk[0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(dk[1] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(dk[2] == doctest::Approx(pump.kz - s.kz - i.kz));
}

TEST_CASE("emission cone at the reference wavelengths") {
    UniaxialCrystal crystal;
    crystal.material = test_material();
    crystal.length_z = 5e-3;
    ConeSolution sol = cone_solve(400e-9, 800e-9, crystal);
    REQUIRE(sol.matchable);
    CHECK(sol.theta_internal * 180.0 / pi == doctest::Approx(17.2).epsilon(0.01));
    CHECK(sol.theta_external * 180.0 / pi == doctest::Approx(33.4).epsilon(0.01));
    // consistency: exact refraction at the exit face
    double n_s = index_ordinary(crystal.material, 800e-9);
    CHECK(std::sin(sol.theta_external) ==
          doctest::Approx(n_s * std::sin(sol.theta_internal)).epsilon(1e-12));
}

TEST_CASE("cone solve reports unmatchable configurations") {
    UniaxialCrystal crystal;
    crystal.material = constant_index_material(1.5, 1.6);  // pump faster than daughters
    crystal.length_z = 5e-3;
    ConeSolution sol = cone_solve(400e-9, 800e-9, crystal);
    CHECK(!sol.matchable);
    CHECK(sol.residual != 0.0);
}

TEST_CASE("index-matched constant material emits collinearly") {
    UniaxialCrystal crystal;
    crystal.material = constant_index_material(1.8, 1.8);
    crystal.length_z = 5e-3;
    ConeSolution sol = cone_solve(400e-9, 800e-9, crystal);
    REQUIRE(sol.matchable);
    CHECK(sol.theta_internal == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("external/internal angle round trip") {
    double n = 1.88;
    for (double th : {0.05, 0.2, 0.3}) {
        double ext = external_angle(th, n);
        CHECK(ext > th);
        CHECK(internal_angle(ext, n) == doctest::Approx(th).epsilon(1e-12));
    }
}

TEST_CASE("crystal validation") {
    UniaxialCrystal crystal;
    crystal.material = test_material();
    crystal.length_z = 0.0;
    CHECK_THROWS_AS(crystal.validate(), std::invalid_argument);
    crystal.length_z = 5e-3;
    CHECK_NOTHROW(crystal.validate());
    CHECK(!crystal.finite_transverse());
    crystal.width_x = 1e-3;
    CHECK(crystal.finite_transverse());
}
