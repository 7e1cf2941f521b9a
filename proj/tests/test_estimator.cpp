#include <cmath>

#include "doctest.h"
#include "pfsim/estimator.hpp"

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

Frame make_frame(std::uint64_t idx,
                 std::initializer_list<std::pair<int, int>> signal,
                 std::initializer_list<std::pair<int, int>> idler) {
    Frame f;
    f.index = idx;
    for (auto [c, r] : signal) f.events.push_back({StripRole::signal, c, r, EventOrigin::pair_signal});
    for (auto [c, r] : idler) f.events.push_back({StripRole::idler, c, r, EventOrigin::pair_idler});
    return f;
}
}  // namespace

TEST_CASE("pairwise weights are 1/(M L) per frame") {
    DetectionGeometry geom = test_geometry();
    std::vector<Frame> frames;
    // frame 0: 2 signal x 1 idler -> each combination weighs 1/2
    frames.push_back(make_frame(0, {{20, 10}, {21, 10}}, {{20, 50}}));
    // frame 1: 1 x 1 -> weight 1
    frames.push_back(make_frame(1, {{20, 10}}, {{20, 50}}));
    // frame 2: idler empty -> skipped
    frames.push_back(make_frame(2, {{20, 10}}, {}));

    CorrelationHistogram h = estimate_g(frames, MapAxis::X, geom);
    CHECK(h.frames_used == 2);
    CHECK(h.total_weight == doctest::Approx(2.0).epsilon(1e-12));
    // strip-local X coordinates: signal col-18, idler col-18
    int n = h.n_idler;
    CHECK(h.weight[(20 - 18) * n + (20 - 18)] == doctest::Approx(0.5 + 1.0).epsilon(1e-12));
    CHECK(h.weight[(21 - 18) * n + (20 - 18)] == doctest::Approx(0.5).epsilon(1e-12));

    // normalized singles marginals over the used frames
    CHECK(h.signal_marginal[20 - 18] == doctest::Approx(0.5 + 1.0).epsilon(1e-12));
    CHECK(h.signal_marginal[21 - 18] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(h.idler_marginal[20 - 18] == doctest::Approx(2.0).epsilon(1e-12));
    // accidental expectation: outer product / frames
    CHECK(h.excess(20 - 18, 20 - 18) == doctest::Approx(1.5 - 1.5 * 2.0 / 2.0).epsilon(1e-12));
}

TEST_CASE("estimator matches the naive reference bit for bit") {
    DetectionGeometry geom = test_geometry();
    // deterministic pseudo-random frames, up to ~20 events per strip
    std::vector<Frame> frames;
    std::uint64_t s = 12345;
    auto next = [&s]() { s = s * 6364136223846793005ULL + 1442695040888963407ULL; return s >> 33; };
    for (int i = 0; i < 100; ++i) {
        Frame f;
        f.index = i;
        int m = next() % 21, l = next() % 21;
        for (int j = 0; j < m; ++j)
            f.events.push_back({StripRole::signal, int(18 + next() % 28), int(6 + next() % 16),
                                EventOrigin::pair_signal});
        for (int j = 0; j < l; ++j)
            f.events.push_back({StripRole::idler, int(18 + next() % 28), int(42 + next() % 16),
                                EventOrigin::pair_idler});
        frames.push_back(std::move(f));
    }
    for (MapAxis axis : {MapAxis::X, MapAxis::Y}) {
        CorrelationHistogram a = estimate_g(frames, axis, geom);
        CorrelationHistogram b = detail::estimate_g_reference(frames, axis, geom);
        REQUIRE(a.weight.size() == b.weight.size());
        for (size_t i = 0; i < a.weight.size(); ++i) {
            CHECK(a.weight[i] == b.weight[i]);
            CHECK(a.weight_sq[i] == b.weight_sq[i]);
        }
        CHECK(a.signal_marginal == b.signal_marginal);
        CHECK(a.idler_marginal == b.idler_marginal);
        CHECK(a.frames_used == b.frames_used);
        CHECK(a.total_weight == b.total_weight);
    }
}

TEST_CASE("noise monitor counts only the monitor strip") {
    std::vector<Frame> frames(4);
    frames[0].events.push_back({StripRole::noise_monitor, 5, 30, EventOrigin::dark});
    frames[0].events.push_back({StripRole::signal, 20, 10, EventOrigin::pair_signal});
    frames[1].events.push_back({StripRole::noise_monitor, 6, 31, EventOrigin::fluorescence});
    frames[1].events.push_back({StripRole::noise_monitor, 7, 32, EventOrigin::fluorescence});
    NoiseMonitor nm = noise_monitor(frames);
    CHECK(nm.mean == doctest::Approx((1 + 2 + 0 + 0) / 4.0).epsilon(1e-12));
    CHECK(nm.variance > 0.0);
}

TEST_CASE("width report clamps below the resolution floor") {
    CameraModel cam = test_camera();
    double f = 0.15;
    double floor = cam.superpixel_pitch() / f;

    Profile narrow;
    double w = 0.3 * floor;
    for (int i = -30; i <= 30; ++i) {
        double x = i * 0.1 * floor;
        narrow.x.push_back(x);
        narrow.value.push_back(std::exp(-x * x / (w * w)));
    }
    WidthReport r = width_report(narrow, cam, f);
    CHECK(r.resolution_limited);
    CHECK(r.width_rad == doctest::Approx(floor).epsilon(1e-12));
    CHECK(r.raw_width_rad < floor);
    CHECK(r.floor_rad == doctest::Approx(floor).epsilon(1e-12));

    Profile wide;
    w = 3.0 * floor;
    for (int i = -30; i <= 30; ++i) {
        double x = i * 0.3 * floor;
        wide.x.push_back(x);
        wide.value.push_back(std::exp(-x * x / (w * w)));
    }
    r = width_report(wide, cam, f);
    CHECK(!r.resolution_limited);
    CHECK(r.width_rad == doctest::Approx(w).epsilon(1e-3));
    CHECK(r.width_rad == r.raw_width_rad);
}

TEST_CASE("comparison of identical profiles has zero rms") {
    CameraModel cam = test_camera();
    Profile p;
    double w = 2e-3;
    for (int i = -20; i <= 20; ++i) {
        double x = i * 4e-4;
        p.x.push_back(x);
        p.value.push_back(std::exp(-x * x / (w * w)));
    }
    ComparisonReport r = compare(p, p, cam, 0.15);
    // resampling interpolation leaves a tiny residual
    CHECK(r.rms_raw < 1e-5);
    CHECK(r.rms_bgsub < 1e-5);
    CHECK(r.model_width_rad == doctest::Approx(r.estimator.width_rad).epsilon(1e-6));
}

TEST_CASE("comparison rejects disjoint axes") {
    CameraModel cam = test_camera();
    Profile a, b;
    for (int i = 0; i < 10; ++i) {
        a.x.push_back(i * 1e-4);
        a.value.push_back(std::exp(-i * i / 16.0));
        b.x.push_back(1.0 + i * 1e-4);
        b.value.push_back(std::exp(-i * i / 16.0));
    }
    CHECK_THROWS(compare(a, b, cam, 0.15));
}
