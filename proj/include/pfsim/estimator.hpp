#pragma once

#include "pfsim/camera.hpp"
#include "pfsim/correlation.hpp"

namespace pfsim {

// Pairwise-combination histogram g over strip-local super-pixel coordinates.
struct CorrelationHistogram {
    MapAxis axis = MapAxis::X;
    int n_signal = 0;  // strip-local coordinate bins
    int n_idler = 0;
    std::vector<double> weight;     // g matrix, row-major [signal * n_idler + idler]
    std::vector<double> weight_sq;  // per-bin sum of squared weights, for errors
    // per-frame normalized singles marginals summed over the used frames;
    // their outer product / frames_used is the accidental expectation of g
    std::vector<double> signal_marginal;
    std::vector<double> idler_marginal;
    std::uint64_t frames_used = 0;  // frames with both strips non-empty
    double total_weight = 0.0;

    // g minus the accidental (uncorrelated-combination) expectation; the pair
    // correlation survives only in the frame-to-frame covariance, since within
    // one frame g is identically the product of the event marginals
    double excess(int a, int b) const {
        return weight[a * n_idler + b] -
               signal_marginal[a] * idler_marginal[b] / static_cast<double>(frames_used);
    }
};

// Every (signal event, idler event) combination of each frame enters with
// weight 1/(M_p L_p); frames with an empty strip contribute nothing.
CorrelationHistogram estimate_g(const std::vector<Frame>& frames, MapAxis axis,
                                const DetectionGeometry& geom);

namespace detail {
// naive triple-loop reference, kept as the correctness oracle
CorrelationHistogram estimate_g_reference(const std::vector<Frame>& frames, MapAxis axis,
                                          const DetectionGeometry& geom);
}

// Idler-averaged cross-section in angular units (small-angle X = f_L2 * gamma),
// with per-point statistical errors.
Profile averaged_profile(const CorrelationHistogram& hist, const CameraModel& camera,
                         const DetectionGeometry& geom);

// events per frame in the noise-monitor strip
struct NoiseMonitor {
    double mean = 0.0;
    double variance = 0.0;
};
NoiseMonitor noise_monitor(const std::vector<Frame>& frames);

struct WidthReport {
    double width_rad = 0.0;      // reported width, clamped to the floor
    double raw_width_rad = 0.0;  // fit value before the resolution clamp
    double stat_error_rad = 0.0;
    double background = 0.0;  // fitted flat accidental level (unit-peak scale)
    bool resolution_limited = false;
    double floor_rad = 0.0;  // super-pixel pitch / f_L2
};

// Background-subtracted 1/e half-width of an angular profile; widths below the
// super-pixel resolution floor are clamped and flagged.
WidthReport width_report(const Profile& profile, const CameraModel& camera, double f_l2);

struct ComparisonReport {
    WidthReport estimator;
    double model_width_rad = 0.0;
    double rms_raw = 0.0;     // unit-peak profiles, no background handling
    double rms_bgsub = 0.0;   // after flat background subtraction on both sides
    double noise_strip_rate = 0.0;  // events per frame, caller-supplied
};

// Model cross-section resampled onto the estimator axis, both normalized to
// unit peak; throws when the axis ranges do not overlap.
ComparisonReport compare(const Profile& estimator_profile, const Profile& model_profile,
                         const CameraModel& camera, double f_l2);

// Model cross-section pushed through the same detection chain the estimator
// sees: sampling-table cell jitter, camera PSF, super-pixel binning over the
// strip rectangles. Directly comparable to averaged_profile output.
Profile detected_model_profile(const BiphotonConfig& config, const DetectorModel& det,
                               const EmissionGeometry& egeom, const AngularGrid& table_grid,
                               const QuadratureSpec& quad, MapAxis axis, const CameraModel& camera,
                               const DetectionGeometry& geom, bool apply_psf = true);

}  // namespace pfsim
