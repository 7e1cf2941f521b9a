#pragma once

#include <cstdint>

#include "pfsim/camera.hpp"
#include "pfsim/correlation.hpp"

namespace pfsim {

// Discrete |d_s d_i S|^2 density over the 4-D angular grid; spectral window
// integrated out per cell. Immutable once built, shared by all frames.
struct PairDensityTable {
    AxisRange gamma_s, beta_s, gamma_i, beta_i;
    std::vector<double> density;  // flattened, see index()
    std::vector<double> cdf;      // inclusive prefix sums of density
    double total = 0.0;

    std::size_t index(int igs, int ibs, int igi, int ibi) const {
        return ((static_cast<std::size_t>(igs) * beta_s.cells + ibs) * gamma_i.cells + igi) *
                   beta_i.cells + ibi;
    }
    void unflatten(std::size_t flat, int& igs, int& ibs, int& igi, int& ibi) const;
    std::size_t size() const { return density.size(); }
};

PairDensityTable build_density_table(const BiphotonConfig& config, const DetectorModel& det,
                                     const EmissionGeometry& geom, const AngularGrid& grid,
                                     int pump_freq_nodes);

namespace detail {
PairDensityTable build_density_table_serial(const BiphotonConfig& config, const DetectorModel& det,
                                            const EmissionGeometry& geom, const AngularGrid& grid,
                                            int pump_freq_nodes);
}

struct SampledPair {
    double gamma_s = 0.0, beta_s = 0.0;  // external angles relative to strip centers
    double gamma_i = 0.0, beta_i = 0.0;
};

// Inverse-CDF draw over flattened cells plus uniform jitter within the cell.
// Throws std::runtime_error on an all-zero density.
std::vector<SampledPair> sample_pairs(const PairDensityTable& table, std::size_t count,
                                      std::mt19937_64& rng);

// cell containing a sampled pair, for distribution checks
std::size_t cell_of(const PairDensityTable& table, const SampledPair& pair);

// degenerate-frequency plane-wave modes of a sampled pair
ModePair to_mode_pair(const BiphotonConfig& config, const EmissionGeometry& geom,
                      const SampledPair& pair, double omega_s, double omega_i);

struct FrameSimConfig {
    double pairs_per_gate = 700.0;  // Poisson mean of generated pairs
    double quantum_efficiency = 0.07;
    NoiseBudget noise;
    bool apply_psf = true;
};

struct SessionSummary {
    std::uint64_t frames = 0;
    std::uint64_t pair_signal = 0, pair_idler = 0;
    std::uint64_t fluorescence = 0, scattered_pump = 0, dark = 0;
    std::uint64_t dropped = 0;         // generated photons that missed the strips
    std::uint64_t merged_pileup = 0;   // events collapsed into an occupied super-pixel

    std::uint64_t noise_events() const { return fluorescence + scattered_pump + dark; }
    std::uint64_t detections() const {
        return pair_signal + pair_idler + noise_events();
    }
};

Frame simulate_frame(const PairDensityTable& table, const FrameSimConfig& sim,
                     const CameraModel& camera, const DetectionGeometry& geom,
                     std::uint64_t master_seed, std::uint64_t frame_index,
                     SessionSummary* stats = nullptr);

// N independent frames with per-frame substreams; OpenMP with deterministic order
std::vector<Frame> simulate_session(const PairDensityTable& table, const FrameSimConfig& sim,
                                    const CameraModel& camera, const DetectionGeometry& geom,
                                    std::uint64_t n_frames, std::uint64_t master_seed,
                                    SessionSummary* summary = nullptr);

namespace detail {
std::vector<Frame> simulate_session_serial(const PairDensityTable& table,
                                           const FrameSimConfig& sim, const CameraModel& camera,
                                           const DetectionGeometry& geom, std::uint64_t n_frames,
                                           std::uint64_t master_seed,
                                           SessionSummary* summary = nullptr);
}

}  // namespace pfsim
