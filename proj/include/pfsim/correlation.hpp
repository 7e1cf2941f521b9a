#pragma once

#include <string>
#include <vector>

#include "pfsim/biphoton.hpp"

namespace pfsim {

struct DetectorModel {
    double bandpass_center_m = 800e-9;
    double bandpass_halfwidth_m = 11e-9;  // 1/e intensity half-width
    double cuton_m = 666e-9;              // edge filter, ideal step
    double peak_transmission = 0.98;
    double quantum_efficiency = 0.07;  // applied at detection, not in transmissivity

    void validate() const;
};

// intensity transmission (bandpass * edge filter); QE excluded
double detector_transmission(const DetectorModel& model, double omega);
// sqrt of the above
double detector_transmissivity(const DetectorModel& model, double omega);

// Strip central directions (external, horizontal plane). The global horizontal
// emission angle of a signal photon is signal_center_gamma + gamma_s; idler
// analogous, so the phase-matched ridge sits at gamma_s ~ -gamma_i.
struct EmissionGeometry {
    double signal_center_gamma = 0.0;  // +cone half-angle
    double idler_center_gamma = 0.0;   // -cone half-angle
};

struct AxisRange {
    double lo = 0.0, hi = 0.0;
    int cells = 1;

    double step() const { return (hi - lo) / cells; }
    double center(int i) const { return lo + (i + 0.5) * step(); }
    std::vector<double> centers() const;
};

struct AngularGrid {
    AxisRange signal_gamma, signal_beta;  // rad, relative to strip centers
    AxisRange idler_gamma, idler_beta;
    double spectral_center_m = 800e-9;  // signal-frequency window
    double spectral_halfwidth_m = 33e-9;
    int spectral_nodes = 12;

    void validate() const;
};

struct QuadratureSpec {
    int cell_order = 4;       // Gauss-Legendre order per main-axis cell dimension
    int cross_sum_nodes = 6;  // conservation-ridge windows (idler beta/gamma)
    int cross_diff_nodes = 3; // broad directions (full-range cross axes, sinc tails)
    int pump_freq_nodes = 24; // omega_p over the pump spectral support
};

enum class MapAxis { X, Y };  // gamma pairing | beta pairing

struct CorrelationMap {
    MapAxis axis = MapAxis::Y;
    std::vector<double> signal_axis;  // cell centers, rad
    std::vector<double> idler_axis;
    std::vector<double> values;  // row-major, [i_signal * n_idler + i_idler]

    double at(int is, int ii) const { return values[is * idler_axis.size() + ii]; }
    std::vector<double> idler_column(int ii) const;
};

// |d_s d_i S|^2 at external angles (relative to strip centers) and frequencies;
// omega_i = omega_p - omega_s
double correlation_integrand(const BiphotonConfig& config, const DetectorModel& det,
                             const EmissionGeometry& geom, double gamma_s, double beta_s,
                             double gamma_i, double beta_i, double omega_s, double omega_p);

// Eq.-style pair count in one (signal cell x idler cell x spectral window) bin.
// Main-axis cell given by index pair on the grid; the cross plane and both
// frequency axes are integrated over their full windows.
double g2_bin(const BiphotonConfig& config, const DetectorModel& det,
              const EmissionGeometry& geom, const AngularGrid& grid, MapAxis axis,
              int signal_cell, int idler_cell, const QuadratureSpec& quad);

// OpenMP over cells, deterministic slot writes
CorrelationMap compute_map(const BiphotonConfig& config, const DetectorModel& det,
                           const EmissionGeometry& geom, const AngularGrid& grid, MapAxis axis,
                           const QuadratureSpec& quad);

// Pointwise conditional cross-sections: the main axis pair is evaluated at the
// cell centers (no cell box convolution), cross axes are still integrated.
// This is the estimand behind the reported model widths — the spread of signal
// directions correlated with one fixed idler direction.
CorrelationMap compute_section(const BiphotonConfig& config, const DetectorModel& det,
                               const EmissionGeometry& geom, const AngularGrid& grid, MapAxis axis,
                               const QuadratureSpec& quad);

namespace detail {
// plain-loop reference used by tests and the benchmark
CorrelationMap compute_map_serial(const BiphotonConfig& config, const DetectorModel& det,
                                  const EmissionGeometry& geom, const AngularGrid& grid,
                                  MapAxis axis, const QuadratureSpec& quad);
}  // namespace detail

struct Profile {
    std::vector<double> x;      // signal coordinate relative to the ridge (rad)
    std::vector<double> value;  // normalized to unit maximum
    std::vector<double> error;  // optional per-point statistical error (same scale)
};

// Re-center each idler column on its ridge, average, normalize to unit max.
Profile averaged_cross_section(const CorrelationMap& map);

// generic version used by both the model map and the estimator histogram;
// variances, when present, propagate into Profile::error
Profile averaged_profile_matrix(const std::vector<double>& signal_axis,
                                const std::vector<double>& idler_axis,
                                const std::vector<double>& values,
                                const std::vector<double>* variances);

// 1/e-of-maximum intensity half-width by an intensity-weighted single-Gaussian
// fit (crossing interpolation as a degenerate-fit fallback); throws
// std::runtime_error when the profile never drops below max/e inside the range.
double halfwidth_1e(const Profile& profile);

// text matrix export, axes in mrad
void save_map_matrix(const CorrelationMap& map, const std::string& path);

}  // namespace pfsim
