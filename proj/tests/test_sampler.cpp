#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "pfsim/constants.hpp"
#include "pfsim/sampler.hpp"
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

AngularGrid coarse_grid() {
    AngularGrid g;
    g.signal_gamma = {-8e-3, 8e-3, 8};
    g.signal_beta = {-8e-3, 8e-3, 8};
    g.idler_gamma = {-8e-3, 8e-3, 8};
    g.idler_beta = {-8e-3, 8e-3, 8};
    g.spectral_nodes = 4;
    return g;
}

CameraModel test_camera() {
    CameraModel c;
    c.sensor_width_m = 12.36e-3;
    c.pixels = 512;
    c.binning = 8;
    c.psf_fwhm_m = 38e-6;
    return c;
}

DetectionGeometry test_geometry(double gamma0) {
    DetectionGeometry g;
    g.focal_length_l2 = 0.15;
    g.signal_strip = {StripRole::signal, 18, 46, 6, 22, gamma0, 0.0, false};
    g.idler_strip = {StripRole::idler, 18, 46, 42, 58, -gamma0, 0.0, false};
    g.noise_strip = {StripRole::noise_monitor, 2, 14, 28, 36, 0.0, 0.0, false};
    return g;
}
}  // namespace

TEST_CASE("density table: parallel equals serial bit for bit") {
    BiphotonConfig c = reference_config();
    EmissionGeometry geom = reference_geometry(c);
    DetectorModel det;
    AngularGrid g = coarse_grid();

    PairDensityTable par = build_density_table(c, det, geom, g, 6);
    PairDensityTable ser = detail::build_density_table_serial(c, det, geom, g, 6);
    REQUIRE(par.size() == ser.size());
    for (size_t i = 0; i < par.size(); ++i) CHECK(par.density[i] == ser.density[i]);
    CHECK(par.total == ser.total);
}

TEST_CASE("table mass sits on the conservation ridge") {
    BiphotonConfig c = reference_config();
    EmissionGeometry geom = reference_geometry(c);
    DetectorModel det;
    PairDensityTable t = build_density_table(c, det, geom, coarse_grid(), 6);

    // sum of density over cells with gamma_s ~ -gamma_i, beta_s ~ -beta_i should
    // dominate the anti-ridge
    double ridge = 0.0, anti = 0.0;
    int n = t.gamma_s.cells;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            ridge += t.density[t.index(a, b, n - 1 - a, n - 1 - b)];
            anti += t.density[t.index(a, b, a, b)];
        }
    CHECK(ridge > 50.0 * anti);
}

TEST_CASE("sampling is deterministic in the seed and follows the table") {
    BiphotonConfig c = reference_config();
    EmissionGeometry geom = reference_geometry(c);
    DetectorModel det;
    PairDensityTable t = build_density_table(c, det, geom, coarse_grid(), 6);

    std::mt19937_64 rng1(42), rng2(42), rng3(43);
    auto a = sample_pairs(t, 500, rng1);
    auto b = sample_pairs(t, 500, rng2);
    auto d = sample_pairs(t, 500, rng3);
    REQUIRE(a.size() == 500);
    bool identical = true, different = false;
    for (size_t i = 0; i < a.size(); ++i) {
        identical = identical && a[i].gamma_s == b[i].gamma_s && a[i].beta_i == b[i].beta_i;
        different = different || a[i].gamma_s != d[i].gamma_s;
    }
    CHECK(identical);
    CHECK(different);

    // every sample lies inside its claimed cell
    for (const auto& p : a) {
        std::size_t cell = cell_of(t, p);
        int igs, ibs, igi, ibi;
        t.unflatten(cell, igs, ibs, igi, ibi);
        CHECK(p.gamma_s >= t.gamma_s.lo + igs * t.gamma_s.step());
        CHECK(p.gamma_s <= t.gamma_s.lo + (igs + 1) * t.gamma_s.step());
        CHECK(p.beta_i >= t.beta_i.lo + ibi * t.beta_i.step());
        CHECK(p.beta_i <= t.beta_i.lo + (ibi + 1) * t.beta_i.step());
    }
}

TEST_CASE("sampling an empty table throws") {
    PairDensityTable t;
    t.gamma_s = t.beta_s = t.gamma_i = t.beta_i = {-1e-3, 1e-3, 2};
    t.density.assign(16, 0.0);
    t.cdf.assign(16, 0.0);
    t.total = 0.0;
    std::mt19937_64 rng(1);
    CHECK_THROWS_AS(sample_pairs(t, 10, rng), std::runtime_error);
}

TEST_CASE("simulated frames land on the strips with the right budget") {
    BiphotonConfig c = reference_config();
    EmissionGeometry egeom = reference_geometry(c);
    DetectorModel det;
    PairDensityTable t = build_density_table(c, det, egeom, coarse_grid(), 6);

    CameraModel cam = test_camera();
    DetectionGeometry geom = test_geometry(egeom.signal_center_gamma);
    FrameSimConfig sim;
    sim.pairs_per_gate = 700;
    sim.quantum_efficiency = 0.07;
    sim.noise.fraction = 0.0182;
    sim.noise.fluorescence_share = 0.9;
    sim.noise.dark_share = 0.016;
    sim.apply_psf = true;

    SessionSummary sum;
    auto frames = simulate_session(t, sim, cam, geom, 400, 42, &sum);
    REQUIRE(frames.size() == 400);
    CHECK(sum.frames == 400);
    CHECK(sum.detections() > 0);
    // ~ 700 * 0.07 detections per arm before losses
    double per_frame = double(sum.pair_signal + sum.pair_idler) / 400;
    CHECK(per_frame > 40.0);
    CHECK(per_frame < 110.0);
    // noise fraction near the configured value (loose at this sample size)
    double nf = double(sum.noise_events()) / sum.detections();
    CHECK(nf > 0.010);
    CHECK(nf < 0.030);
    // fluorescence dominates the noise
    CHECK(sum.fluorescence > 5 * (sum.scattered_pump + sum.dark));

    // all events inside their strip rectangles
    for (const auto& f : frames)
        for (const auto& e : f.events) {
            const StripROI& s = geom.strip(e.strip);
            CHECK(e.col >= s.col0);
            CHECK(e.col < s.col1);
            CHECK(e.row >= s.row0);
            CHECK(e.row < s.row1);
        }
}

TEST_CASE("session is reproducible and parallel equals serial") {
    BiphotonConfig c = reference_config();
    EmissionGeometry egeom = reference_geometry(c);
    DetectorModel det;
    PairDensityTable t = build_density_table(c, det, egeom, coarse_grid(), 6);
    CameraModel cam = test_camera();
    DetectionGeometry geom = test_geometry(egeom.signal_center_gamma);
    FrameSimConfig sim;

    auto a = simulate_session(t, sim, cam, geom, 50, 7);
    auto b = simulate_session(t, sim, cam, geom, 50, 7);
    auto s = detail::simulate_session_serial(t, sim, cam, geom, 50, 7);
    REQUIRE(a.size() == s.size());
    for (size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].events.size() == b[i].events.size());
        REQUIRE(a[i].events.size() == s[i].events.size());
        for (size_t j = 0; j < a[i].events.size(); ++j) {
            CHECK(a[i].events[j].col == s[i].events[j].col);
            CHECK(a[i].events[j].row == s[i].events[j].row);
            CHECK(a[i].events[j].origin == s[i].events[j].origin);
        }
    }
}

TEST_CASE("no duplicate occupied super-pixels within a frame") {
    BiphotonConfig c = reference_config();
    EmissionGeometry egeom = reference_geometry(c);
    DetectorModel det;
    PairDensityTable t = build_density_table(c, det, egeom, coarse_grid(), 6);
    CameraModel cam = test_camera();
    DetectionGeometry geom = test_geometry(egeom.signal_center_gamma);
    FrameSimConfig sim;
    SessionSummary sum;
    auto frames = simulate_session(t, sim, cam, geom, 100, 5, &sum);
    for (const auto& f : frames) {
        std::vector<long> keys;
        for (const auto& e : f.events) keys.push_back(long(e.col) * 4096 + e.row);
        std::sort(keys.begin(), keys.end());
        CHECK(std::adjacent_find(keys.begin(), keys.end()) == keys.end());
    }
    CHECK(sum.merged_pileup > 0);  // with ~100 events on 448 cells collisions must occur
}
