// command-line front end: cone | map | simulate | estimate | sweep | fit-spectrum
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"

#include "pfsim/config.hpp"
#include "pfsim/constants.hpp"
#include "pfsim/estimator.hpp"
#include "pfsim/peak_fit.hpp"
#include "pfsim/svg.hpp"

namespace {

// 0 success, 2 config/usage, 3 physics domain, 4 numerical failure
constexpr int exit_config = 2;
constexpr int exit_physics = 3;
constexpr int exit_numeric = 4;

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> out;
    std::optional<int> binning;
    std::optional<std::uint64_t> frames;
};

void add_common(CLI::App* cmd, CommonFlags& fl, bool config_required = true) {
    auto* c = cmd->add_option("--config", fl.config_path, "experiment config file");
    if (config_required) c->required();
    cmd->add_option("--seed", fl.seed, "override master seed");
    cmd->add_option("--workers", fl.workers, "worker thread count");
    cmd->add_option("--out", fl.out, "output directory");
    cmd->add_option("--binning", fl.binning, "camera binning")->check(CLI::IsMember({4, 8}));
    cmd->add_option("--frames", fl.frames, "frame count for simulation");
}

pfsim::ExperimentConfig load_with_overrides(const CommonFlags& fl) {
    pfsim::ExperimentConfig cfg = pfsim::load_config(fl.config_path);
    if (fl.seed) cfg.master_seed = *fl.seed;
    if (fl.out) cfg.output_dir = *fl.out;
    if (fl.binning) cfg.camera.binning = *fl.binning;
    if (fl.frames) cfg.frames = *fl.frames;
    if (fl.workers) {
#ifdef _OPENMP
        omp_set_num_threads(*fl.workers);
#endif
    }
    cfg.validate();
    std::filesystem::create_directories(cfg.output_dir);
    return cfg;
}

std::string join(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

double rad2deg(double r) { return r * 180.0 / pfsim::pi; }

int run_cone(const CommonFlags& fl) {
    pfsim::ExperimentConfig cfg = load_with_overrides(fl);
    double lp = cfg.pump.spectrum.center_wavelength_m;
    double ls = cfg.grid.spectral_center_m;
    pfsim::ConeSolution sol = pfsim::cone_solve(lp, ls, cfg.crystal);
    std::printf("pump wavelength      %.2f nm\n", lp * 1e9);
    std::printf("signal wavelength    %.2f nm\n", ls * 1e9);
    if (!sol.matchable) {
        std::printf("phase matching       none (collinear mismatch %.4g rad/m)\n", sol.residual);
        std::fprintf(stderr, "error: configuration is not phase-matchable\n");
        return exit_physics;
    }
    std::printf("internal cone angle  %.4f deg\n", rad2deg(sol.theta_internal));
    std::printf("external cone angle  %.4f deg\n", rad2deg(sol.theta_external));
    std::printf("apex angle           %.4f deg\n", rad2deg(sol.theta_external));
    return 0;
}

void write_profile_tsv(const pfsim::Profile& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "# x_mrad\tvalue\terror\n";
    char buf[96];
    for (size_t i = 0; i < p.x.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.9g\t%.9g\t%.9g\n", p.x[i] * 1e3, p.value[i],
                      i < p.error.size() ? p.error[i] : 0.0);
        out << buf;
    }
}

int run_map(const CommonFlags& fl) {
    pfsim::ExperimentConfig cfg = load_with_overrides(fl);
    pfsim::BiphotonConfig bip = cfg.biphoton();
    pfsim::EmissionGeometry geom = cfg.emission_geometry();
    for (pfsim::MapAxis axis : {pfsim::MapAxis::X, pfsim::MapAxis::Y}) {
        const char* tag = axis == pfsim::MapAxis::X ? "x" : "y";
        pfsim::CorrelationMap map =
            pfsim::compute_map(bip, cfg.detector, geom, cfg.map_grid(axis), axis, cfg.quad);
        std::string base = join(cfg.output_dir, std::string("map_") + tag);
        pfsim::save_map_matrix(map, base + ".tsv");
        pfsim::write_sidecar(cfg, base + ".tsv", "map");
        pfsim::save_svg(pfsim::svg_heatmap(map, std::string("correlation map ") + tag),
                        base + ".svg");
        pfsim::CorrelationMap section =
            pfsim::compute_section(bip, cfg.detector, geom, cfg.section_grid(axis), axis, cfg.quad);
        pfsim::Profile prof = pfsim::averaged_cross_section(section);
        write_profile_tsv(prof, base + "_profile.tsv");
        pfsim::write_sidecar(cfg, base + "_profile.tsv", "map");
        pfsim::save_svg(pfsim::svg_profile(prof, std::string("averaged cross-section ") + tag),
                        base + "_profile.svg");
        double width = pfsim::halfwidth_1e(prof);
        std::printf("%s-axis model width  %.4f mrad\n", tag, width * 1e3);
    }
    std::printf("outputs written to %s\n", cfg.output_dir.c_str());
    return 0;
}

int run_simulate(const CommonFlags& fl) {
    pfsim::ExperimentConfig cfg = load_with_overrides(fl);
    pfsim::BiphotonConfig bip = cfg.biphoton();
    pfsim::EmissionGeometry geom = cfg.emission_geometry();
    pfsim::PairDensityTable table = pfsim::build_density_table(
        bip, cfg.detector, geom, cfg.grid, cfg.quad.pump_freq_nodes);
    pfsim::SessionSummary summary;
    std::vector<pfsim::Frame> frames = pfsim::simulate_session(
        table, cfg.frame_sim(), cfg.camera, cfg.detection_geometry(), cfg.frames,
        cfg.master_seed, &summary);
    std::string path = join(cfg.output_dir, "frames.txt");
    pfsim::FrameFileHeader header;
    header.camera = cfg.camera;
    header.focal_length_l2 = cfg.geometry.focal_length_l2;
    header.master_seed = cfg.master_seed;
    pfsim::save_frames(path, header, frames);
    pfsim::write_sidecar(cfg, path, "simulate");
    double det = static_cast<double>(summary.detections());
    std::printf("frames               %llu\n", (unsigned long long)summary.frames);
    std::printf("detections           %llu\n", (unsigned long long)summary.detections());
    std::printf("noise fraction       %.4f\n", det > 0 ? summary.noise_events() / det : 0.0);
    std::printf("frame file           %s\n", path.c_str());
    return 0;
}

int run_estimate(const CommonFlags& fl, const std::string& frames_path) {
    pfsim::ExperimentConfig cfg = load_with_overrides(fl);
    pfsim::FrameFileHeader header;
    std::vector<pfsim::Frame> frames = pfsim::load_frames(frames_path, &header);
    if (frames.empty()) throw std::runtime_error("estimate: frame file holds no frames");
    pfsim::DetectionGeometry geom = cfg.detection_geometry();
    pfsim::BiphotonConfig bip = cfg.biphoton();
    pfsim::EmissionGeometry egeom = cfg.emission_geometry();

    nlohmann::json report;
    for (pfsim::MapAxis axis : {pfsim::MapAxis::X, pfsim::MapAxis::Y}) {
        const char* tag = axis == pfsim::MapAxis::X ? "x" : "y";
        pfsim::CorrelationHistogram hist = pfsim::estimate_g(frames, axis, geom);
        if (hist.frames_used == 0) throw std::runtime_error("estimate: no usable frames");
        std::string base = join(cfg.output_dir, std::string("hist_") + tag);
        {
            std::ofstream out(base + ".tsv");
            out << "# g matrix, rows signal super-pixel, cols idler super-pixel\n";
            for (int a = 0; a < hist.n_signal; ++a) {
                for (int b = 0; b < hist.n_idler; ++b)
                    out << hist.weight[a * hist.n_idler + b] << (b + 1 < hist.n_idler ? '\t' : '\n');
            }
        }
        pfsim::write_sidecar(cfg, base + ".tsv", "estimate");
        pfsim::Profile est = pfsim::averaged_profile(hist, cfg.camera, geom);
        write_profile_tsv(est, base + "_profile.tsv");
        pfsim::save_svg(pfsim::svg_profile(est, std::string("estimator cross-section ") + tag),
                        base + "_profile.svg");

        pfsim::Profile model = pfsim::detected_model_profile(bip, cfg.detector, egeom, cfg.grid,
                                                             cfg.quad, axis, cfg.camera, geom,
                                                             cfg.apply_psf);
        pfsim::ComparisonReport cmp =
            pfsim::compare(est, model, cfg.camera, cfg.geometry.focal_length_l2);
        cmp.noise_strip_rate = pfsim::noise_monitor(frames).mean;

        nlohmann::json j;
        j["frames_used"] = hist.frames_used;
        j["estimator_width_mrad"] = cmp.estimator.width_rad * 1e3;
        j["estimator_width_error_mrad"] = cmp.estimator.stat_error_rad * 1e3;
        j["resolution_limited"] = cmp.estimator.resolution_limited;
        j["resolution_floor_mrad"] = cmp.estimator.floor_rad * 1e3;
        j["model_width_mrad"] = cmp.model_width_rad * 1e3;
        j["rms_raw"] = cmp.rms_raw;
        j["rms_background_subtracted"] = cmp.rms_bgsub;
        j["noise_strip_rate_per_frame"] = cmp.noise_strip_rate;
        report[tag] = j;
        std::printf("%s-axis width %.4f mrad (model %.4f), rms %.4f%s\n", tag,
                    cmp.estimator.width_rad * 1e3, cmp.model_width_rad * 1e3, cmp.rms_bgsub,
                    cmp.estimator.resolution_limited ? " [resolution limited]" : "");
    }
    std::ofstream out(join(cfg.output_dir, "comparison.json"));
    out << report.dump(2) << "\n";
    return 0;
}

struct SweepFlags {
    std::string param;
    std::vector<double> values;
    std::uint64_t sim_frames = 0;
};

void apply_sweep_value(pfsim::ExperimentConfig& cfg, const std::string& param, double v) {
    if (param == "waist_y_mm") {
        cfg.pump.angular.waist_y = v * 1e-3;
    } else if (param == "waist_x_mm") {
        cfg.pump.angular.waist_x = v * 1e-3;
    } else if (param == "bandwidth_nm") {
        if (cfg.pump.spectrum.peaks.empty())
            throw std::invalid_argument("sweep: config has no pump peaks");
        for (auto& p : cfg.pump.spectrum.peaks) p.width_m = v * 1e-9;
    } else if (param == "length_mm") {
        cfg.crystal.length_z = v * 1e-3;
    } else {
        throw std::invalid_argument("sweep: unknown parameter '" + param + "'");
    }
}

int run_sweep(const CommonFlags& fl, const SweepFlags& sw) {
    if (sw.values.size() < 2) throw std::invalid_argument("sweep: need at least 2 values");
    pfsim::ExperimentConfig base = load_with_overrides(fl);
    double floor_rad = base.camera.superpixel_pitch() / base.geometry.focal_length_l2;

    std::string path = join(base.output_dir, "sweep_" + sw.param + ".tsv");
    std::ofstream out(path);
    out << "# " << sw.param << "\tmodel_width_mrad\testimator_width_mrad\tfloor_mrad\n";
    pfsim::Profile curve;
    for (double v : sw.values) {
        pfsim::ExperimentConfig cfg = base;
        apply_sweep_value(cfg, sw.param, v);
        cfg.validate();
        pfsim::BiphotonConfig bip = cfg.biphoton();
        pfsim::EmissionGeometry egeom = cfg.emission_geometry();
        pfsim::CorrelationMap section = pfsim::compute_section(bip, cfg.detector, egeom,
                                                               cfg.section_grid(pfsim::MapAxis::Y),
                                                               pfsim::MapAxis::Y, cfg.quad);
        double model_w = pfsim::halfwidth_1e(pfsim::averaged_cross_section(section));
        double est_w = std::nan("");
        if (sw.sim_frames > 0) {
            pfsim::PairDensityTable table = pfsim::build_density_table(
                bip, cfg.detector, egeom, cfg.grid, cfg.quad.pump_freq_nodes);
            pfsim::DetectionGeometry geom = cfg.detection_geometry();
            std::vector<pfsim::Frame> frames = pfsim::simulate_session(
                table, cfg.frame_sim(), cfg.camera, geom, sw.sim_frames, cfg.master_seed);
            pfsim::CorrelationHistogram hist =
                pfsim::estimate_g(frames, pfsim::MapAxis::Y, geom);
            pfsim::Profile est = pfsim::averaged_profile(hist, cfg.camera, geom);
            est_w = pfsim::width_report(est, cfg.camera, cfg.geometry.focal_length_l2).width_rad;
        }
        char buf[128];
        std::snprintf(buf, sizeof buf, "%.9g\t%.9g\t%.9g\t%.9g\n", v, model_w * 1e3, est_w * 1e3,
                      floor_rad * 1e3);
        out << buf;
        std::printf("%s = %-8g model width %.4f mrad\n", sw.param.c_str(), v, model_w * 1e3);
        curve.x.push_back(v * 1e-3);  // svg axis reuses the mrad scaling
        curve.value.push_back(model_w * 1e3);
        curve.error.push_back(0.0);
    }
    out.close();
    pfsim::write_sidecar(base, path, "sweep");
    pfsim::save_svg(pfsim::svg_profile(curve, "model width vs " + sw.param),
                    join(base.output_dir, "sweep_" + sw.param + ".svg"));
    std::printf("resolution floor     %.4f mrad\n", floor_rad * 1e3);
    return 0;
}

int run_fit_spectrum(const CommonFlags& fl, const std::string& input, int n_peaks) {
    if (n_peaks < 1) throw std::invalid_argument("fit-spectrum: need at least 1 peak");
    std::ifstream in(input);
    if (!in) throw std::runtime_error("cannot open spectrometer file: " + input);
    std::vector<double> lambda_nm, intensity;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream is(line);
        double x, y;
        if (is >> x >> y) {
            lambda_nm.push_back(x);
            intensity.push_back(y);
        }
    }
    pfsim::PeakFitResult fit = pfsim::fit_gaussians(lambda_nm, intensity, n_peaks);

    std::string out_dir = fl.out ? *fl.out : ".";
    std::filesystem::create_directories(out_dir);
    std::string frag_path = join(out_dir, "pump_spectrum.conf");
    std::ofstream frag(frag_path);
    frag << "[pump]\n";
    for (size_t i = 0; i < fit.peaks.size(); ++i) {
        const auto& p = fit.peaks[i];
        std::string prefix = "peak." + std::to_string(i + 1) + ".";
        char buf[160];
        std::snprintf(buf, sizeof buf, "%samplitude = %.9g\n%scenter_nm = %.9g\n%swidth_nm = %.9g\n",
                      prefix.c_str(), p.amplitude, prefix.c_str(), p.center, prefix.c_str(),
                      p.width);
        frag << buf;
        std::printf("peak %zu  amplitude %.6g  center %.6g nm  width %.6g nm\n", i + 1,
                    p.amplitude, p.center, p.width);
    }
    std::printf("rms residual         %.4g\n", fit.rms_residual);
    std::printf("config fragment      %s\n", frag_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"angular correlation toolkit for type-I parametric fluorescence"};
    app.require_subcommand(1);

    CommonFlags cone_fl, map_fl, sim_fl, est_fl, sweep_fl_c, fit_fl;
    add_common(app.add_subcommand("cone", "phase-matching cone summary"), cone_fl);
    add_common(app.add_subcommand("map", "model correlation maps and cross-sections"), map_fl);
    add_common(app.add_subcommand("simulate", "Monte Carlo frame session"), sim_fl);

    auto* est = app.add_subcommand("estimate", "pairwise estimator on a frame file");
    std::string frames_path;
    est->add_option("frame-file", frames_path, "frame file")->required();
    add_common(est, est_fl);

    auto* sweep = app.add_subcommand("sweep", "model width versus a swept parameter");
    SweepFlags sw;
    sweep->add_option("--param", sw.param, "waist_y_mm | waist_x_mm | bandwidth_nm | length_mm")
        ->required();
    sweep->add_option("--values", sw.values, "parameter values")->required()->delimiter(',');
    sweep->add_option("--sim-frames", sw.sim_frames, "per-point simulated frames (0 = model only)");
    add_common(sweep, sweep_fl_c);

    auto* fit = app.add_subcommand("fit-spectrum", "multi-peak Gaussian fit of a spectrum");
    std::string spectrum_path;
    int n_peaks = 0;
    fit->add_option("input", spectrum_path, "two-column wavelength_nm intensity file")->required();
    fit->add_option("--peaks", n_peaks, "number of Gaussian components")->required();
    fit->add_option("--out", fit_fl.out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : exit_config;
    }

    try {
        if (app.got_subcommand("cone")) return run_cone(cone_fl);
        if (app.got_subcommand("map")) return run_map(map_fl);
        if (app.got_subcommand("simulate")) return run_simulate(sim_fl);
        if (app.got_subcommand("estimate")) return run_estimate(est_fl, frames_path);
        if (app.got_subcommand("sweep")) return run_sweep(sweep_fl_c, sw);
        if (app.got_subcommand("fit-spectrum"))
            return run_fit_spectrum(fit_fl, spectrum_path, n_peaks);
    } catch (const pfsim::FitNotConverged& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return exit_numeric;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "physics error: %s\n", e.what());
        return exit_physics;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return exit_config;
    } catch (const std::runtime_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_config;
    }
    return exit_config;
}
