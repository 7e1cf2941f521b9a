// timing comparison of the OpenMP kernels against their serial references
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "pfsim/correlation.hpp"
#include "pfsim/estimator.hpp"
#include "pfsim/rng.hpp"
#include "pfsim/sampler.hpp"
#include "pfsim/sellmeier.hpp"

using namespace pfsim;

namespace {

template <class F>
double timed(F&& f) {
    auto t0 = std::chrono::steady_clock::now();
    f();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

BiphotonConfig make_config(const std::string& data_dir) {
    BiphotonConfig bip;
    bip.crystal.material = load_sellmeier_file(data_dir + "/liio3.sellmeier");
    bip.crystal.length_z = 5e-3;
    bip.pump.spectrum.center_wavelength_m = 400e-9;
    bip.pump.spectrum.peaks = {{1.0, 400e-9, 1.3e-9}};
    bip.pump.angular.waist_x = 0.3e-3;
    bip.pump.angular.waist_y = 0.3e-3;
    return bip;
}

AngularGrid make_grid() {
    AngularGrid g;
    g.signal_gamma = {-8e-3, 8e-3, 4};
    g.signal_beta = {-8e-3, 8e-3, 24};
    g.idler_gamma = {-8e-3, 8e-3, 4};
    g.idler_beta = {-8e-3, 8e-3, 8};
    g.spectral_nodes = 4;
    return g;
}

}  // namespace

int main(int argc, char** argv) {
    std::string data_dir = argc > 1 ? argv[1] : "data";
    BiphotonConfig bip = make_config(data_dir);
    DetectorModel det;
    ConeSolution cone = cone_solve(400e-9, 800e-9, bip.crystal);
    EmissionGeometry egeom{cone.theta_external, -cone.theta_external};
    AngularGrid grid = make_grid();
    QuadratureSpec quad;

    CorrelationMap mp, ms;
    double t_map_par = timed([&] { mp = compute_map(bip, det, egeom, grid, MapAxis::Y, quad); });
    double t_map_ser =
        timed([&] { ms = detail::compute_map_serial(bip, det, egeom, grid, MapAxis::Y, quad); });
    double max_rel = 0.0;
    for (size_t i = 0; i < mp.values.size(); ++i) {
        double d = std::abs(mp.values[i] - ms.values[i]);
        double s = std::abs(ms.values[i]) + 1e-300;
        max_rel = std::max(max_rel, d / s);
    }
    std::printf("compute_map        parallel %8.3f s   serial %8.3f s   speedup %5.2fx   max rel dev %.2e\n",
                t_map_par, t_map_ser, t_map_ser / t_map_par, max_rel);

    PairDensityTable tp, ts;
    double t_tab_par =
        timed([&] { tp = build_density_table(bip, det, egeom, grid, quad.pump_freq_nodes); });
    double t_tab_ser = timed(
        [&] { ts = detail::build_density_table_serial(bip, det, egeom, grid, quad.pump_freq_nodes); });
    bool tab_identical = tp.density == ts.density;
    std::printf("density table      parallel %8.3f s   serial %8.3f s   speedup %5.2fx   %s\n",
                t_tab_par, t_tab_ser, t_tab_ser / t_tab_par,
                tab_identical ? "bit-identical" : "DIFFERS");

    CameraModel camera;
    DetectionGeometry geom;
    geom.signal_strip = {StripRole::signal, 10, 38, 8, 24, egeom.signal_center_gamma, 0.0, false};
    geom.idler_strip = {StripRole::idler, 10, 38, 40, 56, egeom.idler_center_gamma, 0.0, false};
    geom.noise_strip = {StripRole::noise_monitor, 44, 58, 28, 36, 0.0, 0.0, false};

    FrameSimConfig sim;
    sim.pairs_per_gate = 50.0;
    std::vector<Frame> fp, fs;
    const std::uint64_t n_frames = 20000;
    double t_sim_par =
        timed([&] { fp = simulate_session(tp, sim, camera, geom, n_frames, 7); });
    double t_sim_ser =
        timed([&] { fs = detail::simulate_session_serial(tp, sim, camera, geom, n_frames, 7); });
    bool frames_match = fp.size() == fs.size();
    for (size_t i = 0; frames_match && i < fp.size(); ++i)
        frames_match = fp[i].events.size() == fs[i].events.size();
    std::printf("simulate_session   parallel %8.3f s   serial %8.3f s   speedup %5.2fx   %s\n",
                t_sim_par, t_sim_ser, t_sim_ser / t_sim_par,
                frames_match ? "matching" : "DIFFERS");

    CorrelationHistogram hp, hs;
    double t_est_par = timed([&] { hp = estimate_g(fp, MapAxis::Y, geom); });
    double t_est_ser = timed([&] { hs = detail::estimate_g_reference(fp, MapAxis::Y, geom); });
    bool est_identical = hp.weight == hs.weight;
    std::printf("estimate_g         parallel %8.3f s   serial %8.3f s   speedup %5.2fx   %s\n",
                t_est_par, t_est_ser, t_est_ser / t_est_par,
                est_identical ? "bit-identical" : "DIFFERS");

    return (tab_identical && frames_match && est_identical) ? 0 : 1;
}
