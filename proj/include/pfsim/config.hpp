#pragma once

#include <cstdint>
#include <string>

#include "pfsim/biphoton.hpp"
#include "pfsim/correlation.hpp"
#include "pfsim/sampler.hpp"

namespace pfsim {

// Whole-experiment parameter set; file keys carry units (mm, nm, mrad),
// everything is SI internally.
struct ExperimentConfig {
    std::string dispersion_file = "data/liio3.sellmeier";
    UniaxialCrystal crystal;  // material loaded from dispersion_file
    PumpBeam pump;
    DetectorModel detector;
    CameraModel camera;
    DetectionGeometry geometry;
    bool gamma0_auto = true;        // strip centers from cone_solve
    double gamma0_override = 0.0;   // rad, used when not auto
    AngularGrid grid;               // Monte Carlo table grid + spectral window
    int map_signal_cells = 192;     // model-map main-axis resolution
    int map_idler_cells = 12;
    QuadratureSpec quad;
    TransverseMode transverse_mode = TransverseMode::delta_conservation;
    double normalization = 1.0;
    NoiseBudget noise;
    bool apply_psf = true;
    std::uint64_t frames = 200000;
    std::uint64_t master_seed = 1;
    std::string output_dir = "out";

    BiphotonConfig biphoton() const;
    EmissionGeometry emission_geometry() const;  // may run cone_solve
    DetectionGeometry detection_geometry() const;  // strips with centre angles filled in
    AngularGrid map_grid(MapAxis axis) const;    // table ranges, map cell counts
    AngularGrid section_grid(MapAxis axis) const;  // width sections, central idler slice
    FrameSimConfig frame_sim() const;
    void validate() const;
};

ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& config, const std::string& path);
std::string serialize_config(const ExperimentConfig& config);

// JSON metadata sidecar contents (config snapshot + version)
std::string config_sidecar_json(const ExperimentConfig& config, const std::string& produced_by);
void write_sidecar(const ExperimentConfig& config, const std::string& data_path,
                   const std::string& produced_by);

}  // namespace pfsim
