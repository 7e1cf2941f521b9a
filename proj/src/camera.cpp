#include "pfsim/camera.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pfsim {

void CameraModel::validate() const {
    if (!(sensor_width_m > 0.0)) throw std::invalid_argument("camera: sensor width must be > 0");
    if (pixels < binning || binning < 1) throw std::invalid_argument("camera: pixel count >= binning >= 1");
    if (pixels % binning != 0) throw std::invalid_argument("camera: binning must divide pixel count");
    if (psf_fwhm_m < 0.0) throw std::invalid_argument("camera: PSF FWHM must be >= 0");
}

const StripROI& DetectionGeometry::strip(StripRole role) const {
    switch (role) {
        case StripRole::signal: return signal_strip;
        case StripRole::idler: return idler_strip;
        default: return noise_strip;
    }
}

void DetectionGeometry::validate(const CameraModel& camera) const {
    if (!(focal_length_l2 > 0.0)) throw std::invalid_argument("geometry: f_L2 must be > 0");
    int n = camera.superpixels();
    const StripROI* strips[3] = {&signal_strip, &idler_strip, &noise_strip};
    for (const StripROI* s : strips) {
        if (s->col0 < 0 || s->col1 > n || s->row0 < 0 || s->row1 > n || s->cols() < 1 ||
            s->rows() < 1)
            throw std::invalid_argument("geometry: strip rectangle outside sensor");
    }
    for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b) {
            bool overlap = strips[a]->col0 < strips[b]->col1 && strips[b]->col0 < strips[a]->col1 &&
                           strips[a]->row0 < strips[b]->row1 && strips[b]->row0 < strips[a]->row1;
            if (overlap) throw std::invalid_argument("geometry: strips must be disjoint");
        }
}

int Frame::signal_count() const {
    int n = 0;
    for (const auto& e : events) n += e.strip == StripRole::signal;
    return n;
}

int Frame::idler_count() const {
    int n = 0;
    for (const auto& e : events) n += e.strip == StripRole::idler;
    return n;
}

void NoiseBudget::validate() const {
    if (fraction < 0.0 || fraction >= 1.0) throw std::invalid_argument("noise: fraction must be in [0,1)");
    if (fluorescence_share < 0.0 || dark_share < 0.0 || scattered_share() < -1e-12)
        throw std::invalid_argument("noise: shares must be >= 0 and sum to <= 1");
}

std::optional<FrameEvent> angle_to_pixel(const DetectionGeometry& geom, const CameraModel& camera,
                                         const StripROI& strip, double gamma, double beta,
                                         bool apply_psf, std::mt19937_64& rng) {
    double f = geom.focal_length_l2;
    double dx = f * std::tan(gamma - strip.center_gamma);
    if (strip.mirrored) dx = -dx;
    double dy = f * std::tan(beta - strip.center_beta);
    if (apply_psf && camera.psf_fwhm_m > 0.0) {
        double sigma = camera.psf_fwhm_m / 2.35482004503;
        std::normal_distribution<double> psf(0.0, sigma);
        dx += psf(rng);
        dy += psf(rng);
    }
    double pitch = camera.superpixel_pitch();
    double cx = 0.5 * (strip.col0 + strip.col1);  // rectangle centre in super-pixel units
    double cy = 0.5 * (strip.row0 + strip.row1);
    int col = static_cast<int>(std::floor(cx + dx / pitch));
    int row = static_cast<int>(std::floor(cy + dy / pitch));
    if (col < strip.col0 || col >= strip.col1 || row < strip.row0 || row >= strip.row1)
        return std::nullopt;
    FrameEvent ev;
    ev.strip = strip.role;
    ev.col = col;
    ev.row = row;
    return ev;
}

void pixel_center_to_angle(const DetectionGeometry& geom, const CameraModel& camera,
                           const StripROI& strip, int col, int row, double& gamma, double& beta) {
    double pitch = camera.superpixel_pitch();
    double cx = 0.5 * (strip.col0 + strip.col1);
    double cy = 0.5 * (strip.row0 + strip.row1);
    double dx = (col + 0.5 - cx) * pitch;
    if (strip.mirrored) dx = -dx;
    double dy = (row + 0.5 - cy) * pitch;
    gamma = strip.center_gamma + std::atan(dx / geom.focal_length_l2);
    beta = strip.center_beta + std::atan(dy / geom.focal_length_l2);
}

namespace {

const char* role_tag(StripRole r) {
    switch (r) {
        case StripRole::signal: return "S";
        case StripRole::idler: return "I";
        default: return "N";
    }
}

StripRole parse_role(const std::string& s) {
    if (s == "S") return StripRole::signal;
    if (s == "I") return StripRole::idler;
    if (s == "N") return StripRole::noise_monitor;
    throw std::runtime_error("frame file: bad strip tag '" + s + "'");
}

const char* origin_tag(EventOrigin o) {
    switch (o) {
        case EventOrigin::pair_signal: return "pair-signal";
        case EventOrigin::pair_idler: return "pair-idler";
        case EventOrigin::fluorescence: return "fluorescence";
        case EventOrigin::scattered_pump: return "scattered-pump";
        default: return "dark";
    }
}

EventOrigin parse_origin(const std::string& s) {
    if (s == "pair-signal") return EventOrigin::pair_signal;
    if (s == "pair-idler") return EventOrigin::pair_idler;
    if (s == "fluorescence") return EventOrigin::fluorescence;
    if (s == "scattered-pump") return EventOrigin::scattered_pump;
    if (s == "dark") return EventOrigin::dark;
    throw std::runtime_error("frame file: bad origin tag '" + s + "'");
}

}  // namespace

void save_frames(const std::string& path, const FrameFileHeader& header,
                 const std::vector<Frame>& frames) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write frame file: " + path);
    out << "# pfsim frames v1\n";
    out << "# sensor_width_mm " << header.camera.sensor_width_m * 1e3 << " pixels "
        << header.camera.pixels << " binning " << header.camera.binning << " psf_fwhm_um "
        << header.camera.psf_fwhm_m * 1e6 << "\n";
    out << "# f_l2_mm " << header.focal_length_l2 * 1e3 << " seed " << header.master_seed << "\n";
    for (const auto& frame : frames) {
        out << "frame " << frame.index << " " << frame.events.size() << "\n";
        for (const auto& e : frame.events)
            out << role_tag(e.strip) << " " << e.col << " " << e.row << " " << origin_tag(e.origin)
                << "\n";
    }
}

std::vector<Frame> load_frames(const std::string& path, FrameFileHeader* header) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open frame file: " + path);
    std::vector<Frame> frames;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (header) {
                std::istringstream hs(line.substr(1));
                std::string key;
                while (hs >> key) {
                    double v;
                    if (key == "sensor_width_mm" && hs >> v) header->camera.sensor_width_m = v * 1e-3;
                    else if (key == "pixels" && hs >> v) header->camera.pixels = static_cast<int>(v);
                    else if (key == "binning" && hs >> v) header->camera.binning = static_cast<int>(v);
                    else if (key == "psf_fwhm_um" && hs >> v) header->camera.psf_fwhm_m = v * 1e-6;
                    else if (key == "f_l2_mm" && hs >> v) header->focal_length_l2 = v * 1e-3;
                    else if (key == "seed" && hs >> v) header->master_seed = static_cast<std::uint64_t>(v);
                }
            }
            continue;
        }
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        if (word != "frame") throw std::runtime_error("frame file: expected 'frame', got '" + word + "'");
        Frame frame;
        size_t n_events = 0;
        if (!(ls >> frame.index >> n_events)) throw std::runtime_error("frame file: bad frame header");
        frame.events.reserve(n_events);
        for (size_t i = 0; i < n_events; ++i) {
            if (!std::getline(in, line)) throw std::runtime_error("frame file: truncated frame record");
            std::istringstream es(line);
            std::string role, origin;
            FrameEvent ev;
            if (!(es >> role >> ev.col >> ev.row >> origin))
                throw std::runtime_error("frame file: bad event line");
            ev.strip = parse_role(role);
            ev.origin = parse_origin(origin);
            frame.events.push_back(ev);
        }
        frames.push_back(std::move(frame));
    }
    return frames;
}

}  // namespace pfsim
