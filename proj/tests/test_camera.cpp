#include <cmath>
#include <cstdio>
#include <random>

#include "doctest.h"
#include "pfsim/camera.hpp"

using namespace pfsim;

namespace {
CameraModel test_camera() {
    CameraModel c;
    c.sensor_width_m = 12.36e-3;
    c.pixels = 512;
    c.binning = 8;
    c.psf_fwhm_m = 38e-6;
    return c;
}

DetectionGeometry test_geometry() {
    DetectionGeometry g;
    g.focal_length_l2 = 0.15;
    g.signal_strip = {StripRole::signal, 18, 46, 6, 22, 0.5843, 0.0, false};
    g.idler_strip = {StripRole::idler, 18, 46, 42, 58, -0.5843, 0.0, false};
    g.noise_strip = {StripRole::noise_monitor, 2, 14, 28, 36, 0.0, 0.0, false};
    return g;
}
}  // namespace

TEST_CASE("camera pitch accounting") {
    CameraModel c = test_camera();
    CHECK(c.superpixels() == 64);
    CHECK(c.superpixel_pitch() == doctest::Approx(12.36e-3 / 512 * 8).epsilon(1e-12));
    c.binning = 5;  // does not divide 512
    CHECK_THROWS(c.validate());
}

TEST_CASE("pixel mapping round trip at the strip center") {
    CameraModel cam = test_camera();
    DetectionGeometry geom = test_geometry();
    std::mt19937_64 rng(7);

    // the strip centre direction maps into the centre superpixel
    auto ev = angle_to_pixel(geom, cam, geom.signal_strip, geom.signal_strip.center_gamma,
                             geom.signal_strip.center_beta, false, rng);
    REQUIRE(ev.has_value());
    CHECK(ev->col == (18 + 46) / 2);
    CHECK(ev->row == (6 + 22) / 2);

    // round trip through every superpixel of the strip
    for (int col = 18; col < 46; ++col)
        for (int row = 6; row < 22; ++row) {
            double g, b;
            pixel_center_to_angle(geom, cam, geom.signal_strip, col, row, g, b);
            auto back = angle_to_pixel(geom, cam, geom.signal_strip, g, b, false, rng);
            REQUIRE(back.has_value());
            CHECK(back->col == col);
            CHECK(back->row == row);
        }
}

TEST_CASE("events outside the strip are dropped") {
    CameraModel cam = test_camera();
    DetectionGeometry geom = test_geometry();
    std::mt19937_64 rng(7);
    // a direction 100 mrad off the strip centre is far outside the rectangle
    auto ev = angle_to_pixel(geom, cam, geom.signal_strip, geom.signal_strip.center_gamma + 0.1,
                             0.0, false, rng);
    CHECK(!ev.has_value());
}

TEST_CASE("mirrored strip flips the horizontal direction") {
    CameraModel cam = test_camera();
    DetectionGeometry geom = test_geometry();
    geom.idler_strip.mirrored = true;
    std::mt19937_64 rng(7);
    double dg = 3e-3;
    auto plus = angle_to_pixel(geom, cam, geom.idler_strip,
                               geom.idler_strip.center_gamma + dg, 0.0, false, rng);
    geom.idler_strip.mirrored = false;
    auto minus = angle_to_pixel(geom, cam, geom.idler_strip,
                                geom.idler_strip.center_gamma - dg, 0.0, false, rng);
    REQUIRE(plus.has_value());
    REQUIRE(minus.has_value());
    CHECK(plus->col == minus->col);
    CHECK(plus->row == minus->row);
}

TEST_CASE("psf scatters events with the configured spot size") {
    CameraModel cam = test_camera();
    DetectionGeometry geom = test_geometry();
    std::mt19937_64 rng(123);
    double g, b;
    pixel_center_to_angle(geom, cam, geom.signal_strip, 30, 14, g, b);
    // just inside the right edge of the superpixel: the 16um-sigma spot spills
    // into the neighbour about half the time, never much further
    g += 0.49 * cam.superpixel_pitch() / geom.focal_length_l2;
    int moved = 0;
    const int n = 2000;
    for (int i = 0; i < n; ++i) {
        auto ev = angle_to_pixel(geom, cam, geom.signal_strip, g, b, true, rng);
        REQUIRE(ev.has_value());
        if (ev->col != 30 || ev->row != 14) ++moved;
        CHECK(std::abs(ev->col - 30) <= 1);
        CHECK(std::abs(ev->row - 14) <= 1);
    }
    CHECK(moved > n / 10);
    CHECK(moved < 9 * n / 10);
}

TEST_CASE("geometry validation rejects overlapping strips") {
    CameraModel cam = test_camera();
    DetectionGeometry geom = test_geometry();
    CHECK_NOTHROW(geom.validate(cam));
    geom.idler_strip.row0 = 20;  // overlaps the signal strip rows with same cols
    CHECK_THROWS(geom.validate(cam));
    geom = test_geometry();
    geom.signal_strip.col1 = 70;  // out of sensor bounds
    CHECK_THROWS(geom.validate(cam));
}

TEST_CASE("frame files round trip") {
    CameraModel cam = test_camera();
    FrameFileHeader hdr;
    hdr.camera = cam;
    hdr.focal_length_l2 = 0.15;
    hdr.master_seed = 99;

    std::vector<Frame> frames(3);
    frames[0].index = 0;
    frames[0].events.push_back({StripRole::signal, 20, 10, EventOrigin::pair_signal});
    frames[0].events.push_back({StripRole::idler, 25, 50, EventOrigin::pair_idler});
    frames[1].index = 1;  // empty frame
    frames[2].index = 2;
    frames[2].events.push_back({StripRole::noise_monitor, 5, 30, EventOrigin::dark});
    frames[2].events.push_back({StripRole::signal, 21, 11, EventOrigin::fluorescence});

    std::string path = "frames_roundtrip_test.txt";
    save_frames(path, hdr, frames);
    FrameFileHeader back_hdr;
    auto back = load_frames(path, &back_hdr);
    std::remove(path.c_str());

    CHECK(back_hdr.master_seed == 99);
    CHECK(back_hdr.camera.binning == 8);
    CHECK(back_hdr.camera.pixels == 512);
    REQUIRE(back.size() == 3);
    CHECK(back[1].events.empty());
    REQUIRE(back[0].events.size() == 2);
    CHECK(back[0].events[0].strip == StripRole::signal);
    CHECK(back[0].events[1].origin == EventOrigin::pair_idler);
    CHECK(back[2].events[0].origin == EventOrigin::dark);
    CHECK(back[2].events[1].origin == EventOrigin::fluorescence);
    CHECK(back[0].signal_count() == 1);
    CHECK(back[0].idler_count() == 1);
}
