#include "pfsim/config.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "pfsim/constants.hpp"

namespace pfsim {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    size_t e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

struct KeyValueFile {
    std::map<std::string, std::string> kv;
    std::string path;

    const std::string& need(const std::string& key) const {
        auto it = kv.find(key);
        if (it == kv.end()) throw std::runtime_error(path + ": missing key '" + key + "'");
        return it->second;
    }
    double parse_num(const std::string& key, const std::string& text) const {
        try {
            size_t used = 0;
            double v = std::stod(text, &used);
            if (trim(text.substr(used)).empty()) return v;
        } catch (const std::exception&) {
        }
        throw std::runtime_error(path + ": number expected for '" + key + "', got '" + text + "'");
    }
    double num(const std::string& key) const { return parse_num(key, need(key)); }
    double num_or(const std::string& key, double fallback) const {
        auto it = kv.find(key);
        return it == kv.end() ? fallback : parse_num(key, it->second);
    }
    std::string str_or(const std::string& key, const std::string& fallback) const {
        auto it = kv.find(key);
        return it == kv.end() ? fallback : it->second;
    }
    bool flag_or(const std::string& key, bool fallback) const {
        auto it = kv.find(key);
        if (it == kv.end()) return fallback;
        if (it->second == "true" || it->second == "1") return true;
        if (it->second == "false" || it->second == "0") return false;
        throw std::runtime_error(path + ": boolean expected for '" + key + "'");
    }
    std::pair<double, double> range(const std::string& key) const {
        std::istringstream is(need(key));
        double a, b;
        if (!(is >> a >> b)) throw std::runtime_error(path + ": two numbers expected for '" + key + "'");
        return {a, b};
    }
};

KeyValueFile parse_kv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    KeyValueFile f;
    f.path = path;
    std::string line, section;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) throw std::runtime_error(path + ": bad line '" + line + "'");
        std::string key = trim(line.substr(0, eq));
        f.kv[section.empty() ? key : section + "." + key] = trim(line.substr(eq + 1));
    }
    return f;
}

StripROI parse_strip(const KeyValueFile& f, const std::string& prefix, StripRole role) {
    StripROI s;
    s.role = role;
    auto [c0, c1] = f.range(prefix + "_cols");
    auto [r0, r1] = f.range(prefix + "_rows");
    s.col0 = static_cast<int>(c0);
    s.col1 = static_cast<int>(c1);
    s.row0 = static_cast<int>(r0);
    s.row1 = static_cast<int>(r1);
    return s;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

BiphotonConfig ExperimentConfig::biphoton() const {
    BiphotonConfig b;
    b.crystal = crystal;
    b.pump = pump;
    b.mode = transverse_mode;
    b.normalization = normalization;
    return b;
}

EmissionGeometry ExperimentConfig::emission_geometry() const {
    double gamma0;
    if (gamma0_auto) {
        ConeSolution sol = cone_solve(pump.spectrum.center_wavelength_m,
                                      grid.spectral_center_m, crystal);
        if (!sol.matchable)
            throw std::domain_error("emission_geometry: configuration is not phase-matchable");
        gamma0 = sol.theta_external;
    } else {
        gamma0 = gamma0_override;
    }
    EmissionGeometry g;
    g.signal_center_gamma = gamma0;
    g.idler_center_gamma = -gamma0;
    return g;
}

DetectionGeometry ExperimentConfig::detection_geometry() const {
    EmissionGeometry e = emission_geometry();
    DetectionGeometry g = geometry;
    g.signal_strip.center_gamma = e.signal_center_gamma;
    g.idler_strip.center_gamma = e.idler_center_gamma;
    g.noise_strip.center_gamma = 0.0;
    return g;
}

AngularGrid ExperimentConfig::map_grid(MapAxis axis) const {
    AngularGrid g = grid;
    if (axis == MapAxis::Y) {
        g.signal_beta.cells = map_signal_cells;
        g.idler_beta.cells = map_idler_cells;
    } else {
        g.signal_gamma.cells = map_signal_cells;
        g.idler_gamma.cells = map_idler_cells;
    }
    return g;
}

AngularGrid ExperimentConfig::section_grid(MapAxis axis) const {
    // idler directions kept to the central half of the strip so every
    // re-centered conditional profile fits inside the signal range
    AngularGrid g = map_grid(axis);
    AxisRange& idler = axis == MapAxis::Y ? g.idler_beta : g.idler_gamma;
    idler.lo *= 0.5;
    idler.hi *= 0.5;
    return g;
}

FrameSimConfig ExperimentConfig::frame_sim() const {
    FrameSimConfig s;
    s.pairs_per_gate = pump.pairs_per_gate;
    s.quantum_efficiency = detector.quantum_efficiency;
    s.noise = noise;
    s.apply_psf = apply_psf;
    return s;
}

void ExperimentConfig::validate() const {
    crystal.validate();
    pump.spectrum.validate();
    if (!(pump.angular.waist_x > 0.0) || !(pump.angular.waist_y > 0.0))
        throw std::invalid_argument("config: pump waists must be > 0");
    if (pump.pairs_per_gate < 0.0) throw std::invalid_argument("config: pairs_per_gate must be >= 0");
    detector.validate();
    camera.validate();
    geometry.validate(camera);
    grid.validate();
    noise.validate();
    if (map_signal_cells < 2 || map_idler_cells < 1)
        throw std::invalid_argument("config: map cell counts too small");
}

ExperimentConfig load_config(const std::string& path) {
    KeyValueFile f = parse_kv(path);
    ExperimentConfig c;

    c.dispersion_file = f.str_or("crystal.dispersion_file", c.dispersion_file);
    std::filesystem::path disp(c.dispersion_file);
    if (!std::filesystem::exists(disp)) {
        // try next to the config file, then one level up (configs/ beside data/)
        std::filesystem::path base = std::filesystem::path(path).parent_path();
        for (const auto& cand : {base / disp, base / ".." / disp}) {
            if (std::filesystem::exists(cand)) {
                disp = cand;
                break;
            }
        }
    }
    c.crystal.material = load_sellmeier_file(disp.string());
    c.crystal.length_z = f.num("crystal.length_mm") * 1e-3;
    std::string wx = f.str_or("crystal.width_x_mm", "inf");
    std::string wy = f.str_or("crystal.width_y_mm", "inf");
    c.crystal.width_x = wx == "inf" ? std::numeric_limits<double>::infinity() : std::stod(wx) * 1e-3;
    c.crystal.width_y = wy == "inf" ? std::numeric_limits<double>::infinity() : std::stod(wy) * 1e-3;

    c.pump.spectrum.regime = f.str_or("pump.regime", "cw") == "pulsed" ? PumpRegime::pulsed
                                                                       : PumpRegime::cw;
    c.pump.spectrum.center_wavelength_m = f.num("pump.center_nm") * 1e-9;
    for (int i = 1;; ++i) {
        std::string prefix = "pump.peak." + std::to_string(i) + ".";
        if (!f.kv.count(prefix + "center_nm")) break;
        SpectralPeak p;
        p.amplitude = f.num_or(prefix + "amplitude", 1.0);
        p.center_m = f.num(prefix + "center_nm") * 1e-9;
        p.width_m = f.num(prefix + "width_nm") * 1e-9;
        c.pump.spectrum.peaks.push_back(p);
    }
    c.pump.angular.waist_x = f.num("pump.waist_x_mm") * 1e-3;
    c.pump.angular.waist_y = f.num("pump.waist_y_mm") * 1e-3;
    c.pump.angular.waist_offset_z = f.num_or("pump.waist_offset_mm", 0.0) * 1e-3;
    c.pump.pairs_per_gate = f.num_or("pump.pairs_per_gate", 700.0);

    c.detector.bandpass_center_m = f.num_or("detector.bandpass_center_nm", 800.0) * 1e-9;
    c.detector.bandpass_halfwidth_m = f.num_or("detector.bandpass_width_nm", 11.0) * 1e-9;
    c.detector.cuton_m = f.num_or("detector.cuton_nm", 666.0) * 1e-9;
    c.detector.peak_transmission = f.num_or("detector.peak_transmission", 0.98);
    c.detector.quantum_efficiency = f.num_or("detector.quantum_efficiency", 0.07);

    c.camera.sensor_width_m = f.num_or("camera.sensor_mm", 12.36) * 1e-3;
    c.camera.pixels = static_cast<int>(f.num_or("camera.pixels", 512));
    c.camera.binning = static_cast<int>(f.num_or("camera.binning", 8));
    c.camera.psf_fwhm_m = f.num_or("camera.psf_fwhm_um", 38.0) * 1e-6;
    c.camera.gate_s = f.num_or("camera.gate_ns", 10.0) * 1e-9;
    c.camera.regime = f.str_or("camera.regime", "pulsed") == "cw" ? GateRegime::cw_internal
                                                                  : GateRegime::pulsed_triggered;

    c.geometry.focal_length_l2 = f.num("geometry.f_l2_mm") * 1e-3;
    std::string gamma0 = f.str_or("geometry.cone_gamma0_mrad", "auto");
    c.gamma0_auto = gamma0 == "auto";
    if (!c.gamma0_auto) c.gamma0_override = std::stod(gamma0) * 1e-3;
    c.geometry.signal_strip = parse_strip(f, "geometry.signal", StripRole::signal);
    c.geometry.idler_strip = parse_strip(f, "geometry.idler", StripRole::idler);
    c.geometry.idler_strip.mirrored = f.flag_or("geometry.idler_mirrored", false);
    c.geometry.noise_strip = parse_strip(f, "geometry.noise", StripRole::noise_monitor);

    auto axis = [&](const std::string& key, const std::string& cells_key) {
        AxisRange a;
        auto [lo, hi] = f.range(key);
        a.lo = lo * 1e-3;
        a.hi = hi * 1e-3;
        a.cells = static_cast<int>(f.num(cells_key));
        return a;
    };
    c.grid.signal_gamma = axis("grid.gamma_s_mrad", "grid.gamma_s_cells");
    c.grid.signal_beta = axis("grid.beta_s_mrad", "grid.beta_s_cells");
    c.grid.idler_gamma = axis("grid.gamma_i_mrad", "grid.gamma_i_cells");
    c.grid.idler_beta = axis("grid.beta_i_mrad", "grid.beta_i_cells");
    c.grid.spectral_center_m = f.num_or("grid.spectral_center_nm", 800.0) * 1e-9;
    c.grid.spectral_halfwidth_m = f.num_or("grid.spectral_halfwidth_nm", 33.0) * 1e-9;
    c.grid.spectral_nodes = static_cast<int>(f.num_or("grid.spectral_nodes", 12));
    c.quad.pump_freq_nodes = static_cast<int>(f.num_or("grid.pump_nodes", 24));
    c.quad.cell_order = static_cast<int>(f.num_or("grid.cell_order", 4));
    c.quad.cross_sum_nodes = static_cast<int>(f.num_or("grid.cross_sum_nodes", 6));
    c.quad.cross_diff_nodes = static_cast<int>(f.num_or("grid.cross_diff_nodes", 3));
    c.map_signal_cells = static_cast<int>(f.num_or("grid.map_signal_cells", 192));
    c.map_idler_cells = static_cast<int>(f.num_or("grid.map_idler_cells", 12));

    c.transverse_mode = f.str_or("sim.transverse_mode", "delta") == "finite-sinc"
                            ? TransverseMode::finite_sinc
                            : TransverseMode::delta_conservation;
    c.normalization = f.num_or("sim.cn", 1.0);
    c.apply_psf = f.flag_or("sim.apply_psf", true);
    c.frames = static_cast<std::uint64_t>(f.num_or("sim.frames", 200000));
    if (!f.kv.count("sim.master_seed"))
        throw std::runtime_error(path + ": sim.master_seed must be explicit");
    c.master_seed = std::stoull(f.need("sim.master_seed"));

    c.noise.fraction = f.num_or("noise.fraction", 0.0182);
    c.noise.fluorescence_share = f.num_or("noise.fluorescence_share", 0.9);
    c.noise.dark_share = f.num_or("noise.dark_share", 0.016);

    c.output_dir = f.str_or("output.dir", "out");
    c.validate();
    return c;
}

std::string serialize_config(const ExperimentConfig& c) {
    std::ostringstream os;
    os << "[crystal]\n";
    os << "dispersion_file = " << c.dispersion_file << "\n";
    os << "length_mm = " << fmt(c.crystal.length_z * 1e3) << "\n";
    os << "width_x_mm = "
       << (std::isfinite(c.crystal.width_x) ? fmt(c.crystal.width_x * 1e3) : "inf") << "\n";
    os << "width_y_mm = "
       << (std::isfinite(c.crystal.width_y) ? fmt(c.crystal.width_y * 1e3) : "inf") << "\n";
    os << "\n[pump]\n";
    os << "regime = " << (c.pump.spectrum.regime == PumpRegime::pulsed ? "pulsed" : "cw") << "\n";
    os << "center_nm = " << fmt(c.pump.spectrum.center_wavelength_m * 1e9) << "\n";
    for (size_t i = 0; i < c.pump.spectrum.peaks.size(); ++i) {
        const auto& p = c.pump.spectrum.peaks[i];
        std::string prefix = "peak." + std::to_string(i + 1) + ".";
        os << prefix << "amplitude = " << fmt(p.amplitude) << "\n";
        os << prefix << "center_nm = " << fmt(p.center_m * 1e9) << "\n";
        os << prefix << "width_nm = " << fmt(p.width_m * 1e9) << "\n";
    }
    os << "waist_x_mm = " << fmt(c.pump.angular.waist_x * 1e3) << "\n";
    os << "waist_y_mm = " << fmt(c.pump.angular.waist_y * 1e3) << "\n";
    os << "waist_offset_mm = " << fmt(c.pump.angular.waist_offset_z * 1e3) << "\n";
    os << "pairs_per_gate = " << fmt(c.pump.pairs_per_gate) << "\n";
    os << "\n[detector]\n";
    os << "bandpass_center_nm = " << fmt(c.detector.bandpass_center_m * 1e9) << "\n";
    os << "bandpass_width_nm = " << fmt(c.detector.bandpass_halfwidth_m * 1e9) << "\n";
    os << "cuton_nm = " << fmt(c.detector.cuton_m * 1e9) << "\n";
    os << "peak_transmission = " << fmt(c.detector.peak_transmission) << "\n";
    os << "quantum_efficiency = " << fmt(c.detector.quantum_efficiency) << "\n";
    os << "\n[camera]\n";
    os << "sensor_mm = " << fmt(c.camera.sensor_width_m * 1e3) << "\n";
    os << "pixels = " << c.camera.pixels << "\n";
    os << "binning = " << c.camera.binning << "\n";
    os << "psf_fwhm_um = " << fmt(c.camera.psf_fwhm_m * 1e6) << "\n";
    os << "gate_ns = " << fmt(c.camera.gate_s * 1e9) << "\n";
    os << "regime = " << (c.camera.regime == GateRegime::cw_internal ? "cw" : "pulsed") << "\n";
    os << "\n[geometry]\n";
    os << "f_l2_mm = " << fmt(c.geometry.focal_length_l2 * 1e3) << "\n";
    os << "cone_gamma0_mrad = "
       << (c.gamma0_auto ? std::string("auto") : fmt(c.gamma0_override * 1e3)) << "\n";
    auto strip = [&](const char* name, const StripROI& s) {
        os << name << "_cols = " << s.col0 << " " << s.col1 << "\n";
        os << name << "_rows = " << s.row0 << " " << s.row1 << "\n";
    };
    strip("signal", c.geometry.signal_strip);
    strip("idler", c.geometry.idler_strip);
    os << "idler_mirrored = " << (c.geometry.idler_strip.mirrored ? "true" : "false") << "\n";
    strip("noise", c.geometry.noise_strip);
    os << "\n[grid]\n";
    auto axis = [&](const char* name, const AxisRange& a) {
        os << name << "_mrad = " << fmt(a.lo * 1e3) << " " << fmt(a.hi * 1e3) << "\n";
        os << name << "_cells = " << a.cells << "\n";
    };
    axis("gamma_s", c.grid.signal_gamma);
    axis("beta_s", c.grid.signal_beta);
    axis("gamma_i", c.grid.idler_gamma);
    axis("beta_i", c.grid.idler_beta);
    os << "spectral_center_nm = " << fmt(c.grid.spectral_center_m * 1e9) << "\n";
    os << "spectral_halfwidth_nm = " << fmt(c.grid.spectral_halfwidth_m * 1e9) << "\n";
    os << "spectral_nodes = " << c.grid.spectral_nodes << "\n";
    os << "pump_nodes = " << c.quad.pump_freq_nodes << "\n";
    os << "cell_order = " << c.quad.cell_order << "\n";
    os << "cross_sum_nodes = " << c.quad.cross_sum_nodes << "\n";
    os << "cross_diff_nodes = " << c.quad.cross_diff_nodes << "\n";
    os << "map_signal_cells = " << c.map_signal_cells << "\n";
    os << "map_idler_cells = " << c.map_idler_cells << "\n";
    os << "\n[sim]\n";
    os << "transverse_mode = "
       << (c.transverse_mode == TransverseMode::finite_sinc ? "finite-sinc" : "delta") << "\n";
    os << "cn = " << fmt(c.normalization) << "\n";
    os << "apply_psf = " << (c.apply_psf ? "true" : "false") << "\n";
    os << "frames = " << c.frames << "\n";
    os << "master_seed = " << c.master_seed << "\n";
    os << "\n[noise]\n";
    os << "fraction = " << fmt(c.noise.fraction) << "\n";
    os << "fluorescence_share = " << fmt(c.noise.fluorescence_share) << "\n";
    os << "dark_share = " << fmt(c.noise.dark_share) << "\n";
    os << "\n[output]\n";
    os << "dir = " << c.output_dir << "\n";
    return os.str();
}

void save_config(const ExperimentConfig& config, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write config file: " + path);
    out << serialize_config(config);
}

std::string config_sidecar_json(const ExperimentConfig& config, const std::string& produced_by) {
    nlohmann::json j;
    j["format"] = "pfsim-sidecar";
    j["version"] = 1;
    j["produced_by"] = produced_by;
    j["config"] = serialize_config(config);
    j["material"] = config.crystal.material.material;
    j["material_citation"] = config.crystal.material.citation;
    return j.dump(2);
}

void write_sidecar(const ExperimentConfig& config, const std::string& data_path,
                   const std::string& produced_by) {
    std::ofstream out(data_path + ".meta.json");
    if (!out) throw std::runtime_error("cannot write sidecar for: " + data_path);
    out << config_sidecar_json(config, produced_by) << "\n";
}

}  // namespace pfsim
