#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace pfsim {

enum class GateRegime { pulsed_triggered, cw_internal };

struct CameraModel {
    double sensor_width_m = 12.36e-3;  // square sensor
    int pixels = 512;                  // per side
    int binning = 8;                   // 4 or 8 typical
    double psf_fwhm_m = 38e-6;
    double gate_s = 10e-9;
    GateRegime regime = GateRegime::pulsed_triggered;

    int superpixels() const { return pixels / binning; }
    double pixel_pitch() const { return sensor_width_m / pixels; }
    double superpixel_pitch() const { return pixel_pitch() * binning; }
    void validate() const;
};

enum class StripRole { signal, idler, noise_monitor };

struct StripROI {
    StripRole role = StripRole::signal;
    int col0 = 0, col1 = 0;  // super-pixel column range [col0, col1)
    int row0 = 0, row1 = 0;
    double center_gamma = 0.0;  // emission direction mapped to the rectangle centre
    double center_beta = 0.0;
    bool mirrored = false;  // idler path reflected: +gamma maps to -X

    int cols() const { return col1 - col0; }
    int rows() const { return row1 - row0; }
    int superpixel_count() const { return cols() * rows(); }
};

struct DetectionGeometry {
    double focal_length_l2 = 0.15;  // m
    StripROI signal_strip, idler_strip, noise_strip;

    const StripROI& strip(StripRole role) const;
    void validate(const CameraModel& camera) const;  // disjointness, bounds
};

enum class EventOrigin { pair_signal, pair_idler, fluorescence, scattered_pump, dark };

struct FrameEvent {
    StripRole strip = StripRole::signal;
    int col = 0;  // super-pixel coordinates, sensor-global
    int row = 0;
    EventOrigin origin = EventOrigin::pair_signal;
};

struct Frame {
    std::uint64_t index = 0;
    std::vector<FrameEvent> events;

    int signal_count() const;  // M_p
    int idler_count() const;   // L_p
};

struct NoiseBudget {
    double fraction = 0.0182;        // of all detections
    double fluorescence_share = 0.9; // of the noise
    double dark_share = 0.016;
    // scattered pump takes the remainder

    double scattered_share() const { return 1.0 - fluorescence_share - dark_share; }
    void validate() const;
};

// Angle to super-pixel through lens L2, PSF displacement sampling and binning.
// Returns nothing when the event lands outside the strip rectangle.
std::optional<FrameEvent> angle_to_pixel(const DetectionGeometry& geom, const CameraModel& camera,
                                         const StripROI& strip, double gamma, double beta,
                                         bool apply_psf, std::mt19937_64& rng);

// centre direction of a super-pixel, inverse of the mapping above (PSF off)
void pixel_center_to_angle(const DetectionGeometry& geom, const CameraModel& camera,
                           const StripROI& strip, int col, int row, double& gamma, double& beta);

// frame file round trip; header carries camera geometry, binning and seed
struct FrameFileHeader {
    CameraModel camera;
    double focal_length_l2 = 0.15;
    std::uint64_t master_seed = 0;
};
void save_frames(const std::string& path, const FrameFileHeader& header,
                 const std::vector<Frame>& frames);
std::vector<Frame> load_frames(const std::string& path, FrameFileHeader* header = nullptr);

}  // namespace pfsim
