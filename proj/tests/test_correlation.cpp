#include <cmath>

#include "doctest.h"
#include "pfsim/constants.hpp"
#include "pfsim/correlation.hpp"
#include "test_util.hpp"

using namespace pfsim;

namespace {
BiphotonConfig reference_config() {
    BiphotonConfig c;
    c.crystal.material = test_material();
    c.crystal.length_z = 5e-3;
    c.pump.spectrum.center_wavelength_m = 400e-9;
    c.pump.spectrum.peaks.push_back({1.0, 400e-9, 0.59e-9});
    c.pump.angular.waist_x = 0.3e-3;
    c.pump.angular.waist_y = 0.3e-3;
    return c;
}

EmissionGeometry reference_geometry(const BiphotonConfig& c) {
    ConeSolution cone = cone_solve(400e-9, 800e-9, c.crystal);
    return {cone.theta_external, -cone.theta_external};
}

AngularGrid small_grid() {
    AngularGrid g;
    g.signal_gamma = {-6e-3, 6e-3, 6};
    g.signal_beta = {-6e-3, 6e-3, 6};
    g.idler_gamma = {-6e-3, 6e-3, 4};
    g.idler_beta = {-6e-3, 6e-3, 4};
    g.spectral_nodes = 6;
    return g;
}

QuadratureSpec cheap_quad() {
    QuadratureSpec q;
    q.cell_order = 2;
    q.cross_sum_nodes = 4;
    q.cross_diff_nodes = 2;
    q.pump_freq_nodes = 6;
    return q;
}
}  // namespace

TEST_CASE("detector transmission") {
    DetectorModel det;
    double w0 = omega_from_wavelength(800e-9);
    CHECK(detector_transmission(det, w0) == doctest::Approx(0.98).epsilon(1e-9));
    // 1/e point of the bandpass in wavelength
    CHECK(detector_transmission(det, omega_from_wavelength(811e-9)) ==
          doctest::Approx(0.98 * std::exp(-1.0)).epsilon(1e-3));
    // edge filter blocks everything below the cut-on
    CHECK(detector_transmission(det, omega_from_wavelength(650e-9)) == 0.0);
    CHECK(detector_transmissivity(det, w0) ==
          doctest::Approx(std::sqrt(detector_transmission(det, w0))).epsilon(1e-12));
}

TEST_CASE("integrand peaks on the conservation ridge") {
    BiphotonConfig c = reference_config();
    EmissionGeometry geom = reference_geometry(c);
    DetectorModel det;
    double ws = omega_from_wavelength(800e-9);
    double wp = omega_from_wavelength(400e-9);

    double on = correlation_integrand(c, det, geom, 2e-3, 0.0, -2e-3, 0.0, ws, wp);
    double off = correlation_integrand(c, det, geom, 2e-3, 0.0, 2e-3, 0.0, ws, wp);
    CHECK(on > 100.0 * off);
}

TEST_CASE("parallel map is bit-identical to the serial reference") {
    BiphotonConfig c = reference_config();
    EmissionGeometry geom = reference_geometry(c);
    DetectorModel det;
    AngularGrid g = small_grid();
    QuadratureSpec q = cheap_quad();

    CorrelationMap par = compute_map(c, det, geom, g, MapAxis::Y, q);
    CorrelationMap ser = detail::compute_map_serial(c, det, geom, g, MapAxis::Y, q);
    REQUIRE(par.values.size() == ser.values.size());
    for (size_t i = 0; i < par.values.size(); ++i) CHECK(par.values[i] == ser.values[i]);
}

TEST_CASE("map cells match the single-bin evaluator") {
    BiphotonConfig c = reference_config();
    EmissionGeometry geom = reference_geometry(c);
    DetectorModel det;
    AngularGrid g = small_grid();
    QuadratureSpec q = cheap_quad();

    CorrelationMap map = compute_map(c, det, geom, g, MapAxis::X, q);
    CHECK(map.at(2, 1) == doctest::Approx(g2_bin(c, det, geom, g, MapAxis::X, 2, 1, q))
                              .epsilon(1e-12));
    CHECK(map.at(4, 3) == doctest::Approx(g2_bin(c, det, geom, g, MapAxis::X, 4, 3, q))
                              .epsilon(1e-12));
}

TEST_CASE("y map concentrates along the anti-diagonal") {
    BiphotonConfig c = reference_config();
    EmissionGeometry geom = reference_geometry(c);
    DetectorModel det;
    AngularGrid g = small_grid();
    g.signal_beta.cells = 4;  // square in the pairing plane
    CorrelationMap map = compute_map(c, det, geom, g, MapAxis::Y, cheap_quad());

    // beta_s ~ -beta_i: cell (i, n-1-i) beats cell (i, i) away from the centre
    CHECK(map.at(0, 3) > 10.0 * map.at(0, 0));
    CHECK(map.at(3, 0) > 10.0 * map.at(3, 3));
}

TEST_CASE("averaged cross-section of a synthetic ridge") {
    // hand-built map with a Gaussian ridge of known width and unit-slope shift
    CorrelationMap map;
    map.axis = MapAxis::Y;
    int ns = 41, ni = 5;
    double w = 0.8e-3;
    for (int i = 0; i < ns; ++i) map.signal_axis.push_back((i - ns / 2) * 0.2e-3);
    for (int j = 0; j < ni; ++j) map.idler_axis.push_back((j - ni / 2) * 0.2e-3);
    map.values.resize(ns * ni);
    for (int i = 0; i < ns; ++i)
        for (int j = 0; j < ni; ++j) {
            double u = (map.signal_axis[i] + map.idler_axis[j]) / w;
            map.values[i * ni + j] = std::exp(-u * u);
        }
    Profile prof = averaged_cross_section(map);
    CHECK(halfwidth_1e(prof) == doctest::Approx(w).epsilon(0.02));
    // normalized to unit maximum
    double peak = 0.0;
    for (double v : prof.value) peak = std::max(peak, v);
    CHECK(peak == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("halfwidth of an exact gaussian profile") {
    Profile p;
    double w = 1.7e-3;
    for (int i = -40; i <= 40; ++i) {
        double x = i * 2e-4;
        p.x.push_back(x);
        p.value.push_back(std::exp(-x * x / (w * w)));
    }
    CHECK(halfwidth_1e(p) == doctest::Approx(w).epsilon(1e-6));
}

TEST_CASE("halfwidth rejects profiles that never decay") {
    Profile p;
    for (int i = 0; i < 10; ++i) {
        p.x.push_back(i * 1e-3);
        p.value.push_back(1.0 - 1e-4 * i);
    }
    CHECK_THROWS_AS(halfwidth_1e(p), std::runtime_error);
}

TEST_CASE("section widths do not depend on the idler slice discretisation") {
    BiphotonConfig c = reference_config();
    EmissionGeometry geom = reference_geometry(c);
    DetectorModel det;
    QuadratureSpec q = cheap_quad();

    AngularGrid g = small_grid();
    g.signal_beta = {-5e-3, 5e-3, 50};
    g.idler_beta = {-2e-3, 2e-3, 4};
    double w4 = halfwidth_1e(averaged_cross_section(compute_section(c, det, geom, g, MapAxis::Y, q)));
    g.idler_beta = {-2e-3, 2e-3, 8};
    double w8 = halfwidth_1e(averaged_cross_section(compute_section(c, det, geom, g, MapAxis::Y, q)));
    CHECK(w8 == doctest::Approx(w4).epsilon(0.01));
}
