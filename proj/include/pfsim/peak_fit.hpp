#pragma once

#include <stdexcept>
#include <vector>

namespace pfsim {

// One Gaussian component y = a * exp(-((x-c)/w)^2); w is the 1/e half-width.
struct GaussPeak {
    double amplitude = 0.0;
    double center = 0.0;
    double width = 0.0;
};

struct PeakFitResult {
    std::vector<GaussPeak> peaks;
    double rms_residual = 0.0;
    int iterations = 0;
};

struct FitNotConverged : std::runtime_error {
    PeakFitResult best;
    explicit FitNotConverged(const std::string& what, PeakFitResult b)
        : std::runtime_error(what), best(std::move(b)) {}
};

// Multi-peak Gaussian least squares, Levenberg-Marquardt with analytic Jacobian.
// Initialisation: centers at the n largest local maxima of a smoothed profile
// (ties broken toward lower x), widths at span/(4n). Deterministic.
// Relative-step termination 1e-9, 500-iteration cap; the cap throws FitNotConverged
// carrying the best parameters seen.
PeakFitResult fit_gaussians(const std::vector<double>& x, const std::vector<double>& y,
                            int n_peaks);

// Same fit starting from caller-supplied parameters (used for idempotence checks
// and by the width extractor).
PeakFitResult fit_gaussians_from(const std::vector<double>& x, const std::vector<double>& y,
                                 std::vector<GaussPeak> start);

}  // namespace pfsim
