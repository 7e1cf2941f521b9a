#include "pfsim/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pfsim/peak_fit.hpp"

namespace pfsim {

namespace {

int local_coordinate(const FrameEvent& ev, MapAxis axis, const StripROI& strip) {
    return axis == MapAxis::X ? ev.col - strip.col0 : ev.row - strip.row0;
}

struct FrameEventIndex {
    std::vector<int> signal_coords;
    std::vector<int> idler_coords;
};

CorrelationHistogram estimate_impl(const std::vector<Frame>& frames, MapAxis axis,
                                   const DetectionGeometry& geom, bool naive_reference) {
    if (frames.empty()) throw std::invalid_argument("estimate_g: empty frame set");
    const StripROI& ss = geom.signal_strip;
    const StripROI& is = geom.idler_strip;
    CorrelationHistogram h;
    h.axis = axis;
    h.n_signal = axis == MapAxis::X ? ss.cols() : ss.rows();
    h.n_idler = axis == MapAxis::X ? is.cols() : is.rows();
    h.weight.assign(static_cast<std::size_t>(h.n_signal) * h.n_idler, 0.0);
    h.weight_sq.assign(h.weight.size(), 0.0);
    h.signal_marginal.assign(h.n_signal, 0.0);
    h.idler_marginal.assign(h.n_idler, 0.0);

    if (naive_reference) {
        // direct transcription of the triple sum over frames and event pairs
        for (const Frame& frame : frames) {
            int m = frame.signal_count();
            int l = frame.idler_count();
            if (m < 1 || l < 1) continue;
            double w = 1.0 / (static_cast<double>(m) * l);
            for (const FrameEvent& es : frame.events) {
                if (es.strip != StripRole::signal) continue;
                for (const FrameEvent& ei : frame.events) {
                    if (ei.strip != StripRole::idler) continue;
                    int a = local_coordinate(es, axis, ss);
                    int b = local_coordinate(ei, axis, is);
                    h.weight[a * h.n_idler + b] += w;
                    h.weight_sq[a * h.n_idler + b] += w * w;
                }
            }
            for (const FrameEvent& ev : frame.events) {
                if (ev.strip == StripRole::signal)
                    h.signal_marginal[local_coordinate(ev, axis, ss)] += 1.0 / m;
                else if (ev.strip == StripRole::idler)
                    h.idler_marginal[local_coordinate(ev, axis, is)] += 1.0 / l;
            }
            h.frames_used++;
            h.total_weight += 1.0;
        }
        return h;
    }

    // event extraction parallelizes over frames; accumulation runs in frame
    // order so the result is bit-reproducible for any worker count
    std::vector<FrameEventIndex> index(frames.size());
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(frames.size()); ++i) {
        for (const FrameEvent& ev : frames[i].events) {
            if (ev.strip == StripRole::signal)
                index[i].signal_coords.push_back(local_coordinate(ev, axis, ss));
            else if (ev.strip == StripRole::idler)
                index[i].idler_coords.push_back(local_coordinate(ev, axis, is));
        }
    }
    for (const FrameEventIndex& fi : index) {
        std::size_t m = fi.signal_coords.size(), l = fi.idler_coords.size();
        if (m < 1 || l < 1) continue;
        double w = 1.0 / (static_cast<double>(m) * l);
        for (int a : fi.signal_coords)
            for (int b : fi.idler_coords) {
                h.weight[a * h.n_idler + b] += w;
                h.weight_sq[a * h.n_idler + b] += w * w;
            }
        for (int a : fi.signal_coords) h.signal_marginal[a] += 1.0 / m;
        for (int b : fi.idler_coords) h.idler_marginal[b] += 1.0 / l;
        h.frames_used++;
        h.total_weight += 1.0;
    }
    return h;
}

}  // namespace

CorrelationHistogram estimate_g(const std::vector<Frame>& frames, MapAxis axis,
                                const DetectionGeometry& geom) {
    return estimate_impl(frames, axis, geom, false);
}

namespace detail {
CorrelationHistogram estimate_g_reference(const std::vector<Frame>& frames, MapAxis axis,
                                          const DetectionGeometry& geom) {
    return estimate_impl(frames, axis, geom, true);
}
}  // namespace detail

Profile averaged_profile(const CorrelationHistogram& hist, const CameraModel& camera,
                         const DetectionGeometry& geom) {
    double pitch = camera.superpixel_pitch();
    double f = geom.focal_length_l2;
    const StripROI& ss = geom.signal_strip;
    bool flip = hist.axis == MapAxis::X && ss.mirrored;

    std::vector<double> signal_axis(hist.n_signal), idler_axis(hist.n_idler);
    for (int j = 0; j < hist.n_signal; ++j) {
        double off = (j + 0.5 - 0.5 * hist.n_signal) * pitch;
        signal_axis[j] = (flip ? -off : off) / f;
    }
    for (int j = 0; j < hist.n_idler; ++j)
        idler_axis[j] = (j + 0.5 - 0.5 * hist.n_idler) * pitch / f;

    // accidental combinations dominate the raw histogram; only the covariance
    // excess carries the pair correlation
    std::vector<double> values(hist.weight.size());
    for (int a = 0; a < hist.n_signal; ++a)
        for (int b = 0; b < hist.n_idler; ++b) values[a * hist.n_idler + b] = hist.excess(a, b);

    // every excess column sums to zero: subtracting the product of normalized
    // marginals removes the ridge's own share of the singles, leaving a
    // negative background shaped like the signal singles marginal. Restore it
    // per column, with the ridge mass taken from a core window around the
    // column maximum.
    if (hist.frames_used > 0) {
        std::vector<double> mu(hist.n_signal);
        for (int a = 0; a < hist.n_signal; ++a)
            mu[a] = hist.signal_marginal[a] / static_cast<double>(hist.frames_used);
        const int core_half = 3;
        for (int b = 0; b < hist.n_idler; ++b) {
            int a0 = 0;
            for (int a = 1; a < hist.n_signal; ++a)
                if (values[a * hist.n_idler + b] > values[a0 * hist.n_idler + b]) a0 = a;
            double core_sum = 0.0, mu_out = 0.0;
            for (int a = 0; a < hist.n_signal; ++a) {
                if (std::abs(a - a0) <= core_half)
                    core_sum += values[a * hist.n_idler + b];
                else
                    mu_out += mu[a];
            }
            if (!(mu_out > 1e-9)) continue;
            double rho = core_sum / mu_out;
            for (int a = 0; a < hist.n_signal; ++a) values[a * hist.n_idler + b] += rho * mu[a];
        }
    }
    std::vector<double> variances = hist.weight_sq;
    if (flip) {  // keep the signal axis ascending
        std::reverse(signal_axis.begin(), signal_axis.end());
        for (int a = 0; a < hist.n_signal / 2; ++a)
            for (int b = 0; b < hist.n_idler; ++b) {
                std::swap(values[a * hist.n_idler + b],
                          values[(hist.n_signal - 1 - a) * hist.n_idler + b]);
                std::swap(variances[a * hist.n_idler + b],
                          variances[(hist.n_signal - 1 - a) * hist.n_idler + b]);
            }
    }
    return averaged_profile_matrix(signal_axis, idler_axis, values, &variances);
}

NoiseMonitor noise_monitor(const std::vector<Frame>& frames) {
    NoiseMonitor out;
    if (frames.empty()) return out;
    double sum = 0.0, sum2 = 0.0;
    for (const Frame& f : frames) {
        int n = 0;
        for (const FrameEvent& ev : f.events) n += ev.strip == StripRole::noise_monitor;
        sum += n;
        sum2 += static_cast<double>(n) * n;
    }
    out.mean = sum / frames.size();
    out.variance = sum2 / frames.size() - out.mean * out.mean;
    return out;
}

namespace {

// flat accidental level from the outer 20% of the axis
double wing_background(const Profile& p) {
    int n = static_cast<int>(p.x.size());
    int per_side = std::max(1, n / 10);
    double sum = 0.0;
    int cnt = 0;
    for (int i = 0; i < per_side; ++i) {
        sum += p.value[i] + p.value[n - 1 - i];
        cnt += 2;
    }
    return sum / cnt;
}

Profile subtract_background(const Profile& p, double bg) {
    Profile out = p;
    for (double& v : out.value) v -= bg;
    return out;
}

// width uncertainty from the Gaussian-fit curvature with per-point errors
double width_error_estimate(const Profile& p, double amp, double center, double width) {
    double default_err = 0.0;
    for (double e : p.error) default_err = std::max(default_err, e);
    if (!(default_err > 0.0)) return 0.0;
    double m[3][3] = {};
    for (size_t i = 0; i < p.x.size(); ++i) {
        double sig = p.error[i] > 1e-3 * default_err ? p.error[i] : default_err;
        double u = (p.x[i] - center) / width;
        double e = std::exp(-u * u);
        double j[3] = {e, amp * e * 2.0 * u / width, amp * e * 2.0 * u * u / width};
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) m[a][b] += j[a] * j[b] / (sig * sig);
    }
    // invert the 3x3 information matrix, take the width-width element
    double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                 m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                 m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if (std::abs(det) < 1e-300) return 0.0;
    double cof22 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    double var = cof22 / det;
    return var > 0.0 ? std::sqrt(var) : 0.0;
}

}  // namespace

WidthReport width_report(const Profile& profile, const CameraModel& camera, double f_l2) {
    WidthReport report;
    report.floor_rad = camera.superpixel_pitch() / f_l2;
    report.background = wing_background(profile);
    Profile sub = subtract_background(profile, report.background);
    double peak = *std::max_element(sub.value.begin(), sub.value.end());
    if (!(peak > 0.0)) throw std::runtime_error("width_report: background at or above peak, no signal");
    // measured profiles carry detached low-amplitude noise far from the
    // ridge, with x^2 leverage in the log fit far beyond its weight; keep
    // only the contiguous above-threshold run around the peak
    {
        int n = static_cast<int>(sub.value.size());
        int imax = static_cast<int>(std::max_element(sub.value.begin(), sub.value.end()) -
                                    sub.value.begin());
        int lo = imax, hi = imax;
        while (lo > 0 && sub.value[lo - 1] > 0.02 * peak) --lo;
        while (hi + 1 < n && sub.value[hi + 1] > 0.02 * peak) ++hi;
        for (int i = 0; i < n; ++i)
            if (i < lo || i > hi) sub.value[i] = 0.0;
    }
    report.raw_width_rad = halfwidth_1e(sub);
    report.width_rad = report.raw_width_rad;
    int imax = static_cast<int>(std::max_element(sub.value.begin(), sub.value.end()) -
                                sub.value.begin());
    report.stat_error_rad =
        width_error_estimate(sub, peak, sub.x[imax], report.width_rad);
    // the super-pixel response adds to the intrinsic width roughly in
    // quadrature; when the deconvolved width falls below one super-pixel the
    // measurement is instrument-dominated
    double fl2 = report.floor_rad * report.floor_rad;
    double w2 = report.raw_width_rad * report.raw_width_rad;
    double intrinsic = w2 > fl2 ? std::sqrt(w2 - fl2) : 0.0;
    if (intrinsic < report.floor_rad) {
        report.resolution_limited = true;
        report.width_rad = std::max(report.raw_width_rad, report.floor_rad);
    }
    return report;
}

namespace {

// convolve uniformly sampled values with a centered box of the given width
std::vector<double> convolve_box(const std::vector<double>& v, double h, double width) {
    int half = static_cast<int>(std::ceil(0.5 * width / h));
    if (half < 1) return v;
    std::vector<double> kernel(2 * half + 1, 0.0);
    double sum = 0.0;
    for (int k = -half; k <= half; ++k) {
        double lo = std::max((k - 0.5) * h, -0.5 * width);
        double hi = std::min((k + 0.5) * h, 0.5 * width);
        kernel[k + half] = std::max(0.0, hi - lo);
        sum += kernel[k + half];
    }
    std::vector<double> out(v.size(), 0.0);
    int n = static_cast<int>(v.size());
    for (int i = 0; i < n; ++i)
        for (int k = -half; k <= half; ++k) {
            int j = std::clamp(i + k, 0, n - 1);
            out[i] += kernel[k + half] / sum * v[j];
        }
    return out;
}

std::vector<double> convolve_gauss(const std::vector<double>& v, double h, double sigma) {
    if (!(sigma > 0.0)) return v;
    int half = std::max(1, static_cast<int>(std::ceil(4.0 * sigma / h)));
    std::vector<double> kernel(2 * half + 1);
    double sum = 0.0;
    for (int k = -half; k <= half; ++k) {
        kernel[k + half] = std::exp(-0.5 * (k * h) * (k * h) / (sigma * sigma));
        sum += kernel[k + half];
    }
    std::vector<double> out(v.size(), 0.0);
    int n = static_cast<int>(v.size());
    for (int i = 0; i < n; ++i)
        for (int k = -half; k <= half; ++k) {
            int j = std::clamp(i + k, 0, n - 1);
            out[i] += kernel[k + half] / sum * v[j];
        }
    return out;
}

}  // namespace

Profile detected_model_profile(const BiphotonConfig& config, const DetectorModel& det,
                               const EmissionGeometry& egeom, const AngularGrid& table_grid,
                               const QuadratureSpec& quad, MapAxis axis, const CameraModel& camera,
                               const DetectionGeometry& geom, bool apply_psf) {
    const StripROI& ss = geom.signal_strip;
    const StripROI& is = geom.idler_strip;
    int n_s = axis == MapAxis::X ? ss.cols() : ss.rows();
    int n_i = axis == MapAxis::X ? is.cols() : is.rows();
    double pitch = camera.superpixel_pitch() / geom.focal_length_l2;
    const int sub = 8;  // sub-bin samples per super-pixel

    AngularGrid grid = table_grid;
    AxisRange fine{-0.5 * n_s * pitch, 0.5 * n_s * pitch, n_s * sub};
    AxisRange coarse{-0.5 * n_i * pitch, 0.5 * n_i * pitch, n_i};
    double table_step_s, table_step_i;
    if (axis == MapAxis::Y) {
        table_step_s = table_grid.signal_beta.step();
        table_step_i = table_grid.idler_beta.step();
        grid.signal_beta = fine;
        grid.idler_beta = coarse;
    } else {
        table_step_s = table_grid.signal_gamma.step();
        table_step_i = table_grid.idler_gamma.step();
        grid.signal_gamma = fine;
        grid.idler_gamma = coarse;
    }
    CorrelationMap map = compute_map(config, det, egeom, grid, axis, quad);

    // per-column smears along the signal coordinate: sampling-table cell
    // jitter of both photons (idler jitter maps across the ridge of slope -1)
    // and the camera PSF of both events
    double h = fine.step();
    double sigma_psf = apply_psf ? camera.psf_fwhm_m / 2.3548 / geom.focal_length_l2 : 0.0;
    std::vector<double> binned(static_cast<std::size_t>(n_s) * n_i, 0.0);
    for (int ii = 0; ii < n_i; ++ii) {
        std::vector<double> col(fine.cells);
        for (int j = 0; j < fine.cells; ++j) col[j] = map.values[j * n_i + ii];
        col = convolve_box(col, h, table_step_s);
        col = convolve_box(col, h, table_step_i);
        if (sigma_psf > 0.0) col = convolve_gauss(col, h, std::sqrt(2.0) * sigma_psf);
        for (int a = 0; a < n_s; ++a) {
            double acc = 0.0;
            for (int k = 0; k < sub; ++k) acc += col[a * sub + k];
            binned[a * n_i + ii] = acc / sub;
        }
    }

    std::vector<double> signal_axis(n_s), idler_axis(n_i);
    for (int j = 0; j < n_s; ++j) signal_axis[j] = (j + 0.5 - 0.5 * n_s) * pitch;
    for (int j = 0; j < n_i; ++j) idler_axis[j] = (j + 0.5 - 0.5 * n_i) * pitch;
    return averaged_profile_matrix(signal_axis, idler_axis, binned, nullptr);
}

ComparisonReport compare(const Profile& estimator_profile, const Profile& model_profile,
                         const CameraModel& camera, double f_l2) {
    if (estimator_profile.x.front() > model_profile.x.back() ||
        model_profile.x.front() > estimator_profile.x.back())
        throw std::invalid_argument("compare: profile axis ranges are disjoint");

    ComparisonReport report;
    report.estimator = width_report(estimator_profile, camera, f_l2);

    Profile model_sub = subtract_background(model_profile, wing_background(model_profile));
    report.model_width_rad = halfwidth_1e(model_sub);

    auto interp = [](const Profile& p, double xq) -> double {
        auto it = std::upper_bound(p.x.begin(), p.x.end(), xq);
        if (it == p.x.begin() || it == p.x.end()) return 0.0;
        size_t k = it - p.x.begin() - 1;
        double t = (xq - p.x[k]) / (p.x[k + 1] - p.x[k]);
        return (1.0 - t) * p.value[k] + t * p.value[k + 1];
    };
    auto unit_peak = [](Profile p) {
        double m = *std::max_element(p.value.begin(), p.value.end());
        for (double& v : p.value) v /= m;
        return p;
    };

    Profile est_raw = unit_peak(estimator_profile);
    Profile mod_raw = unit_peak(model_profile);
    Profile est_sub = unit_peak(subtract_background(estimator_profile,
                                                    wing_background(estimator_profile)));
    Profile mod_sub2 = unit_peak(model_sub);

    double acc_raw = 0.0, acc_sub = 0.0;
    int n = 0;
    for (size_t i = 0; i < est_raw.x.size(); ++i) {
        double xq = est_raw.x[i];
        if (xq < mod_raw.x.front() || xq > mod_raw.x.back()) continue;
        double dr = est_raw.value[i] - interp(mod_raw, xq);
        double ds = est_sub.value[i] - interp(mod_sub2, xq);
        acc_raw += dr * dr;
        acc_sub += ds * ds;
        ++n;
    }
    if (n == 0) throw std::invalid_argument("compare: no overlapping profile points");
    report.rms_raw = std::sqrt(acc_raw / n);
    report.rms_bgsub = std::sqrt(acc_sub / n);
    return report;
}

}  // namespace pfsim
