#include "pfsim/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "pfsim/constants.hpp"
#include "pfsim/peak_fit.hpp"
#include "pfsim/quadrature.hpp"
#include "freq_table.hpp"

namespace pfsim {

void DetectorModel::validate() const {
    if (!(bandpass_halfwidth_m > 0.0)) throw std::invalid_argument("detector: bandpass width must be > 0");
    if (quantum_efficiency < 0.0 || quantum_efficiency > 1.0)
        throw std::invalid_argument("detector: QE must be in [0,1]");
    if (peak_transmission < 0.0 || peak_transmission > 1.0)
        throw std::invalid_argument("detector: transmission must be in [0,1]");
}

double detector_transmission(const DetectorModel& model, double omega) {
    if (!(omega > 0.0)) throw std::invalid_argument("detector_transmission: omega must be > 0");
    double lambda = wavelength_from_omega(omega);
    if (lambda < model.cuton_m) return 0.0;
    double u = (lambda - model.bandpass_center_m) / model.bandpass_halfwidth_m;
    return model.peak_transmission * std::exp(-u * u);
}

double detector_transmissivity(const DetectorModel& model, double omega) {
    return std::sqrt(detector_transmission(model, omega));
}

std::vector<double> AxisRange::centers() const {
    std::vector<double> out(cells);
    for (int i = 0; i < cells; ++i) out[i] = center(i);
    return out;
}

void AngularGrid::validate() const {
    for (const AxisRange* a : {&signal_gamma, &signal_beta, &idler_gamma, &idler_beta}) {
        if (!(a->hi > a->lo)) throw std::invalid_argument("grid: empty axis range");
        if (a->cells < 1) throw std::invalid_argument("grid: axis needs at least one cell");
    }
    if (spectral_nodes < 2) throw std::invalid_argument("grid: spectral node count >= 2 required");
    if (!(spectral_halfwidth_m > 0.0)) throw std::invalid_argument("grid: spectral window width must be > 0");
}

std::vector<double> CorrelationMap::idler_column(int ii) const {
    std::vector<double> col(signal_axis.size());
    for (size_t is = 0; is < signal_axis.size(); ++is) col[is] = at(static_cast<int>(is), ii);
    return col;
}

double correlation_integrand(const BiphotonConfig& config, const DetectorModel& det,
                             const EmissionGeometry& geom, double gamma_s, double beta_s,
                             double gamma_i, double beta_i, double omega_s, double omega_p) {
    double omega_i = omega_p - omega_s;
    if (omega_i <= 0.0) return 0.0;
    const auto& mat = config.crystal.material;
    double ks0 = omega_s / c_light, ki0 = omega_i / c_light;
    ModePair pair;
    try {
        pair.signal = make_mode(omega_s, ks0 * std::sin(geom.signal_center_gamma + gamma_s),
                                ks0 * std::sin(beta_s), Polarization::ordinary, mat);
        pair.idler = make_mode(omega_i, ki0 * std::sin(geom.idler_center_gamma + gamma_i),
                               ki0 * std::sin(beta_i), Polarization::ordinary, mat);
    } catch (const std::domain_error&) {
        return 0.0;  // evanescent daughter direction: nothing propagates
    } catch (const std::out_of_range&) {
        return 0.0;  // outside dispersion validity: treated as filtered away
    }
    double d2 = detector_transmission(det, omega_s) * detector_transmission(det, omega_i);
    return d2 * joint_intensity(config, pair);
}

namespace detail {

std::pair<double, double> pump_support_lambda(const PumpSpectrum& sp) {
    double lo = 1e300, hi = -1e300;
    for (const auto& p : sp.peaks) {
        lo = std::min(lo, p.center_m - 4.0 * p.width_m);
        hi = std::max(hi, p.center_m + 4.0 * p.width_m);
    }
    return {lo, hi};
}

FreqTable build_freq_table(const BiphotonConfig& config, const DetectorModel& det,
                           const AngularGrid& grid, int pump_freq_nodes) {
    const auto& mat = config.crystal.material;
    double ws_lo = omega_from_wavelength(grid.spectral_center_m + grid.spectral_halfwidth_m);
    double ws_hi = omega_from_wavelength(grid.spectral_center_m - grid.spectral_halfwidth_m);
    MappedRule rs = gauss_legendre_on(ws_lo, ws_hi, grid.spectral_nodes);
    auto [pl_lo, pl_hi] = pump_support_lambda(config.pump.spectrum);
    MappedRule rp = gauss_legendre_on(omega_from_wavelength(pl_hi), omega_from_wavelength(pl_lo),
                                      pump_freq_nodes);
    FreqTable table;
    table.nodes.reserve(rs.x.size() * rp.x.size());
    for (size_t a = 0; a < rs.x.size(); ++a) {
        for (size_t b = 0; b < rp.x.size(); ++b) {
            double ws = rs.x[a], wp = rp.x[b];
            double wi = wp - ws;
            if (wi <= 0.0) continue;
            FreqNode f;
            f.omega_s = ws;
            f.omega_i = wi;
            double lam_s = wavelength_from_omega(ws), lam_i = wavelength_from_omega(wi);
            if (lam_s < mat.lambda_min_m || lam_s > mat.lambda_max_m) continue;
            if (lam_i < mat.lambda_min_m || lam_i > mat.lambda_max_m) continue;
            f.k0s = ws / c_light;
            f.k0i = wi / c_light;
            f.ks = index_ordinary(mat, lam_s) * f.k0s;
            f.ki = index_ordinary(mat, lam_i) * f.k0i;
            double lam_p_um = wavelength_from_omega(wp) * 1e6;
            f.pump_no2 = mat.ordinary.index_squared(lam_p_um);
            f.pump_ne2 = mat.extraordinary.index_squared(lam_p_um);
            double k0p = wp / c_light;
            f.pump_k0sq = k0p * k0p;
            double as = spectral_amplitude(config.pump.spectrum, wp);
            f.freq_w = rs.w[a] * rp.w[b];
            f.aspec2_det2_w = as * as * detector_transmission(det, ws) *
                              detector_transmission(det, wi) * f.freq_w;
            if (f.aspec2_det2_w > 0.0) table.nodes.push_back(f);
        }
    }
    return table;
}

double point_density(const BiphotonConfig& config, const DetectorModel& det,
                     const EmissionGeometry& geom, double gs, double bs, double gi, double bi,
                     double omega_s, double omega_p) {
    if (config.mode == TransverseMode::finite_sinc)
        return correlation_integrand(config, det, geom, gs, bs, gi, bi, omega_s, omega_p);
    double omega_i = omega_p - omega_s;
    if (omega_i <= 0.0) return 0.0;
    const auto& mat = config.crystal.material;
    double lam_s = wavelength_from_omega(omega_s), lam_i = wavelength_from_omega(omega_i);
    if (lam_s < mat.lambda_min_m || lam_s > mat.lambda_max_m) return 0.0;
    if (lam_i < mat.lambda_min_m || lam_i > mat.lambda_max_m) return 0.0;
    FreqNode f;
    f.omega_s = omega_s;
    f.omega_i = omega_i;
    f.k0s = omega_s / c_light;
    f.k0i = omega_i / c_light;
    f.ks = index_ordinary(mat, lam_s) * f.k0s;
    f.ki = index_ordinary(mat, lam_i) * f.k0i;
    double lam_p_um = wavelength_from_omega(omega_p) * 1e6;
    f.pump_no2 = mat.ordinary.index_squared(lam_p_um);
    f.pump_ne2 = mat.extraordinary.index_squared(lam_p_um);
    double k0p = omega_p / c_light;
    f.pump_k0sq = k0p * k0p;
    double as = spectral_amplitude(config.pump.spectrum, omega_p);
    f.freq_w = 1.0;
    f.aspec2_det2_w =
        as * as * detector_transmission(det, omega_s) * detector_transmission(det, omega_i);
    if (!(f.aspec2_det2_w > 0.0)) return 0.0;
    return fast_integrand(config, geom, f, gs, bs, gi, bi);
}

double pump_kappa_x(const BiphotonConfig& config) {
    double k = 5.0 * std::sqrt(2.0) / config.pump.angular.waist_x;
    if (std::isfinite(config.crystal.width_x)) k += 10.0 * pi / config.crystal.width_x;
    return k;
}

double pump_kappa_y(const BiphotonConfig& config) {
    double k = 5.0 * std::sqrt(2.0) / config.pump.angular.waist_y;
    if (std::isfinite(config.crystal.width_y)) k += 10.0 * pi / config.crystal.width_y;
    return k;
}

double FreqKernel::density(double gs, double bs, double gi, double bi) const {
    double ss = std::sin(geom.signal_center_gamma + gs);
    double si = std::sin(geom.idler_center_gamma + gi);
    double slope = (ss - si) / c_light;  // d k_px / d omega_s at fixed directions
    double total = 0.0;
    for (size_t b = 0; b < pump_rule.x.size(); ++b) {
        double wp = pump_rule.x[b];
        double lo = ws_lo, hi = ws_hi;
        if (std::abs(slope) * c_light > 1e-6) {
            double ws_star = -wp * si / (ss - si);
            double half = kappa_x / std::abs(slope);
            lo = std::max(lo, ws_star - half);
            hi = std::min(hi, ws_star + half);
        }
        if (!(hi > lo)) continue;
        const GaussLegendreRule& gr = gauss_legendre(ws_nodes);
        double mid = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
        for (int a = 0; a < gr.order(); ++a) {
            double ws = mid + h * gr.nodes[a];
            total += pump_rule.w[b] * h * gr.weights[a] *
                     point_density(*config, *det, geom, gs, bs, gi, bi, ws, wp);
        }
    }
    return total;
}

FreqKernel make_freq_kernel(const BiphotonConfig& config, const DetectorModel& det,
                            const EmissionGeometry& geom, const AngularGrid& grid,
                            int pump_freq_nodes) {
    FreqKernel fk;
    fk.config = &config;
    fk.det = &det;
    fk.geom = geom;
    fk.ws_lo = omega_from_wavelength(grid.spectral_center_m + grid.spectral_halfwidth_m);
    fk.ws_hi = omega_from_wavelength(grid.spectral_center_m - grid.spectral_halfwidth_m);
    auto [pl_lo, pl_hi] = pump_support_lambda(config.pump.spectrum);
    fk.pump_rule = gauss_legendre_on(omega_from_wavelength(pl_hi), omega_from_wavelength(pl_lo),
                                     pump_freq_nodes);
    fk.ws_nodes = grid.spectral_nodes;
    fk.kappa_x = pump_kappa_x(config);
    return fk;
}

}  // namespace detail

namespace {

using detail::build_freq_table;
using detail::fast_integrand;
using detail::FreqKernel;
using detail::FreqNode;
using detail::FreqTable;
using detail::make_freq_kernel;

// idler in-plane direction matched to k_px = 0 for a frequency pair
bool matched_gamma_i(const FreqNode& f, const EmissionGeometry& geom, double gs, double& gi) {
    double s = -(f.k0s / f.k0i) * std::sin(geom.signal_center_gamma + gs);
    if (std::abs(s) >= 1.0) return false;
    gi = std::asin(s) - geom.idler_center_gamma;
    return true;
}

// collinear-plane longitudinal mismatch along the matched ridge; NaN when the
// configuration is evanescent or unmatchable
double ridge_dkz(const FreqNode& f, const EmissionGeometry& geom, double gs) {
    double gi;
    if (!matched_gamma_i(f, geom, gs, gi)) return std::nan("");
    double ksx = f.k0s * std::sin(geom.signal_center_gamma + gs);
    double kix = f.k0i * std::sin(geom.idler_center_gamma + gi);
    double ksz2 = f.ks * f.ks - ksx * ksx;
    double kiz2 = f.ki * f.ki - kix * kix;
    double kpx = ksx + kix;
    double kpz2 = f.pump_ne2 * f.pump_k0sq - kpx * kpx;
    if (ksz2 <= 0.0 || kiz2 <= 0.0 || kpz2 <= 0.0) return std::nan("");
    return std::sqrt(kpz2) - std::sqrt(ksz2) - std::sqrt(kiz2);
}

struct MapKernel {
    const BiphotonConfig& config;
    const DetectorModel& det;
    const EmissionGeometry& geom;
    const AngularGrid& grid;
    MapAxis axis;
    QuadratureSpec quad;
    bool point_sample;  // evaluate main axes at cell centers instead of cell integrals
    double kappa_x, kappa_y;

    // Y axis: fixed frequency pairs, per-pair in-plane cone rules. The core
    // panel resolves the sinc main lobe, the tail panels integrate the decay
    // with the envelope form of the integrand.
    struct GsRule {
        MappedRule core, tail;
    };
    FreqTable freq;
    std::vector<GsRule> gs_rules;
    // X axis: adaptive signal-frequency window per direction pair
    FreqKernel fk;

    MapKernel(const BiphotonConfig& c, const DetectorModel& d, const EmissionGeometry& g,
              const AngularGrid& gr, MapAxis ax, const QuadratureSpec& q, bool points = false)
        : config(c), det(d), geom(g), grid(gr), axis(ax), quad(q), point_sample(points),
          kappa_x(detail::pump_kappa_x(c)), kappa_y(detail::pump_kappa_y(c)) {
        if (axis == MapAxis::Y) {
            freq = build_freq_table(c, d, gr, q.pump_freq_nodes);
            gs_rules.reserve(freq.nodes.size());
            for (const FreqNode& f : freq.nodes) gs_rules.push_back(build_gs_rule(f));
        } else {
            fk = make_freq_kernel(c, d, g, gr, q.pump_freq_nodes);
        }
    }

    const AxisRange& signal_main() const {
        return axis == MapAxis::Y ? grid.signal_beta : grid.signal_gamma;
    }
    const AxisRange& idler_main() const {
        return axis == MapAxis::Y ? grid.idler_beta : grid.idler_gamma;
    }

    // In-plane signal rule for one frequency pair: the sinc confines the
    // radial offset to a band around the cone radius of that pair; a fine
    // panel covers the band, envelope panels pick up the sinc tails.
    GsRule build_gs_rule(const FreqNode& f) const {
        const AxisRange& s = grid.signal_gamma;
        int core = 4 * quad.cross_sum_nodes, tail = 2 * quad.cross_diff_nodes;
        double lz = config.crystal.length_z;
        // bracket the sign change of dkz over the strip
        const int scan = 64;
        double prev_x = s.lo, prev_v = ridge_dkz(f, geom, s.lo);
        double root = std::nan(""), min_abs = std::abs(prev_v);
        for (int i = 1; i <= scan; ++i) {
            double x = s.lo + (s.hi - s.lo) * i / scan;
            double v = ridge_dkz(f, geom, x);
            if (std::isfinite(v)) min_abs = std::min(min_abs, std::abs(v));
            if (std::isfinite(prev_v) && std::isfinite(v) && prev_v * v <= 0.0) {
                double a = prev_x, b = x, va = prev_v;
                for (int it = 0; it < 60; ++it) {
                    double m = 0.5 * (a + b), vm = ridge_dkz(f, geom, m);
                    if (!std::isfinite(vm)) break;
                    if (va * vm <= 0.0) b = m; else { a = m; va = vm; }
                }
                root = 0.5 * (a + b);
                break;
            }
            prev_x = x;
            prev_v = v;
        }
        GsRule out;
        if (!std::isfinite(root)) {
            // no zero crossing in range: either the whole strip sits on the
            // sinc tail (envelope rule) or near a grazing lobe (exact rule)
            if (std::isfinite(min_abs) && 0.5 * min_abs * lz > pi)
                out.tail = gauss_legendre_on(s.lo, s.hi, tail);
            else
                out.core = gauss_legendre_on(s.lo, s.hi, core);
            return out;
        }
        double eps = 1e-5;
        double d1 = ridge_dkz(f, geom, root + eps), d0 = ridge_dkz(f, geom, root - eps);
        double slope = (std::isfinite(d1) && std::isfinite(d0)) ? (d1 - d0) / (2.0 * eps) : 0.0;
        double lobe = std::abs(slope) > 0.0 ? 2.0 * pi / (lz * std::abs(slope)) : (s.hi - s.lo);
        double c_lo = std::max(s.lo, root - 2.0 * lobe), c_hi = std::min(s.hi, root + 2.0 * lobe);
        out.core = gauss_legendre_on(c_lo, c_hi, core);
        if (c_lo > s.lo) {
            out.tail = gauss_legendre_on(s.lo, c_lo, tail);
        }
        if (c_hi < s.hi) {
            MappedRule r = gauss_legendre_on(c_hi, s.hi, tail);
            out.tail.x.insert(out.tail.x.end(), r.x.begin(), r.x.end());
            out.tail.w.insert(out.tail.w.end(), r.w.begin(), r.w.end());
        }
        return out;
    }

    double cell(int is, int ii) const {
        return axis == MapAxis::Y ? cell_y(is, ii) : cell_x(is, ii);
    }

    MappedRule main_rule(const AxisRange& ax, int i) const {
        if (point_sample) {
            MappedRule r;
            r.x = {ax.center(i)};
            r.w = {1.0};
            return r;
        }
        return gauss_legendre_on(ax.lo + i * ax.step(), ax.lo + (i + 1) * ax.step(),
                                 quad.cell_order);
    }

    // main beta cells; idler beta and idler gamma integrated on windows around
    // the transverse-conservation ridge, signal gamma on the per-pair cone rule
    double cell_y(int is, int ii) const {
        const AxisRange& sm = grid.signal_beta;
        const AxisRange& im = grid.idler_beta;
        double i_lo = im.lo + ii * im.step(), i_hi = i_lo + im.step();
        MappedRule rbs = main_rule(sm, is);
        const GaussLegendreRule& win = gauss_legendre(quad.cross_sum_nodes);
        bool generic = config.mode == TransverseMode::finite_sinc;
        double total = 0.0;
        for (size_t n = 0; n < freq.nodes.size(); ++n) {
            const FreqNode& f = freq.nodes[n];
            for (int part = 0; part < 2; ++part) {
            const MappedRule& rgs = part == 0 ? gs_rules[n].core : gs_rules[n].tail;
            bool env = part == 1;
            if (rgs.x.empty()) continue;
            for (size_t a = 0; a < rbs.x.size(); ++a) {
                double bs = rbs.x[a];
                double sb = -(f.k0s / f.k0i) * std::sin(bs);
                if (std::abs(sb) >= 1.0) continue;
                double bi_c = std::asin(sb);
                double bhalf = kappa_y / (f.k0i * std::cos(bi_c));
                double blo = std::max(i_lo, bi_c - bhalf), bhi = std::min(i_hi, bi_c + bhalf);
                if (!point_sample && !(bhi > blo)) continue;
                double bmid = 0.5 * (blo + bhi), bh = 0.5 * (bhi - blo);
                int nbi = point_sample ? 1 : win.order();
                for (int q = 0; q < nbi; ++q) {
                    double bi = point_sample ? im.center(ii) : bmid + bh * win.nodes[q];
                    double wq = point_sample ? rbs.w[a] : rbs.w[a] * bh * win.weights[q];
                    for (size_t g = 0; g < rgs.x.size(); ++g) {
                        double gs = rgs.x[g];
                        double gi_c;
                        if (!matched_gamma_i(f, geom, gs, gi_c)) continue;
                        double cosg = std::cos(geom.idler_center_gamma + gi_c);
                        double ghalf = kappa_x / (f.k0i * cosg);
                        double glo = std::max(grid.idler_gamma.lo, gi_c - ghalf);
                        double ghi = std::min(grid.idler_gamma.hi, gi_c + ghalf);
                        if (!(ghi > glo)) continue;
                        double gmid = 0.5 * (glo + ghi), gh = 0.5 * (ghi - glo);
                        for (int u = 0; u < win.order(); ++u) {
                            double gi = gmid + gh * win.nodes[u];
                            double w = wq * rgs.w[g] * gh * win.weights[u];
                            if (generic) {
                                total += w * f.freq_w *
                                         correlation_integrand(config, det, geom, gs, bs, gi, bi,
                                                               f.omega_s, f.omega_s + f.omega_i);
                            } else {
                                total += w * fast_integrand(config, geom, f, gs, bs, gi, bi, env);
                            }
                        }
                    }
                }
            }
            }
        }
        return total;
    }

    // main gamma cells; signal frequency adapted per direction pair inside the
    // kernel, vertical plane on a window around the conservation ridge
    double cell_x(int is, int ii) const {
        const AxisRange& sm = grid.signal_gamma;
        const AxisRange& im = grid.idler_gamma;
        MappedRule rgs = main_rule(sm, is);
        MappedRule rgi = main_rule(im, ii);
        MappedRule rbs = gauss_legendre_on(grid.signal_beta.lo, grid.signal_beta.hi,
                                           quad.cross_diff_nodes);
        const GaussLegendreRule& win = gauss_legendre(quad.cross_sum_nodes);
        double k0 = omega_from_wavelength(grid.spectral_center_m) / c_light;
        // frequency asymmetry bound over the window, for the window margin
        double r = grid.spectral_halfwidth_m / grid.spectral_center_m;
        double ratio_margin = 2.0 * r / std::max(1.0 - 2.0 * r, 0.1);
        double total = 0.0;
        for (size_t a = 0; a < rgs.x.size(); ++a) {
            for (size_t b = 0; b < rgi.x.size(); ++b) {
                double wab = rgs.w[a] * rgi.w[b];
                for (size_t p = 0; p < rbs.x.size(); ++p) {
                    double bs = rbs.x[p];
                    double bi_c = -bs;
                    double bhalf = kappa_y / k0 + ratio_margin * std::abs(bs);
                    double blo = std::max(grid.idler_beta.lo, bi_c - bhalf);
                    double bhi = std::min(grid.idler_beta.hi, bi_c + bhalf);
                    if (!(bhi > blo)) continue;
                    double bmid = 0.5 * (blo + bhi), bh = 0.5 * (bhi - blo);
                    for (int q = 0; q < win.order(); ++q) {
                        double bi = bmid + bh * win.nodes[q];
                        double w = wab * rbs.w[p] * bh * win.weights[q];
                        total += w * fk.density(rgs.x[a], bs, rgi.x[b], bi);
                    }
                }
            }
        }
        return total;
    }
};

}  // namespace

double g2_bin(const BiphotonConfig& config, const DetectorModel& det,
              const EmissionGeometry& geom, const AngularGrid& grid, MapAxis axis,
              int signal_cell, int idler_cell, const QuadratureSpec& quad) {
    grid.validate();
    if (quad.cell_order < 1) throw std::invalid_argument("g2_bin: quadrature order must be >= 1");
    MapKernel kernel(config, det, geom, grid, axis, quad);
    return kernel.cell(signal_cell, idler_cell);
}

namespace {

CorrelationMap evaluate_kernel(const MapKernel& kernel) {
    CorrelationMap map;
    map.axis = kernel.axis;
    map.signal_axis = kernel.signal_main().centers();
    map.idler_axis = kernel.idler_main().centers();
    int ns = static_cast<int>(map.signal_axis.size());
    int ni = static_cast<int>(map.idler_axis.size());
    map.values.assign(static_cast<size_t>(ns) * ni, 0.0);
#pragma omp parallel for schedule(dynamic)
    for (int flat = 0; flat < ns * ni; ++flat) {
        map.values[flat] = kernel.cell(flat / ni, flat % ni);
    }
    return map;
}

}  // namespace

CorrelationMap compute_map(const BiphotonConfig& config, const DetectorModel& det,
                           const EmissionGeometry& geom, const AngularGrid& grid, MapAxis axis,
                           const QuadratureSpec& quad) {
    grid.validate();
    MapKernel kernel(config, det, geom, grid, axis, quad);
    return evaluate_kernel(kernel);
}

CorrelationMap compute_section(const BiphotonConfig& config, const DetectorModel& det,
                               const EmissionGeometry& geom, const AngularGrid& grid, MapAxis axis,
                               const QuadratureSpec& quad) {
    grid.validate();
    MapKernel kernel(config, det, geom, grid, axis, quad, true);
    return evaluate_kernel(kernel);
}

namespace detail {

CorrelationMap compute_map_serial(const BiphotonConfig& config, const DetectorModel& det,
                                  const EmissionGeometry& geom, const AngularGrid& grid,
                                  MapAxis axis, const QuadratureSpec& quad) {
    grid.validate();
    MapKernel kernel(config, det, geom, grid, axis, quad);
    CorrelationMap map;
    map.axis = axis;
    map.signal_axis = kernel.signal_main().centers();
    map.idler_axis = kernel.idler_main().centers();
    int ni = static_cast<int>(map.idler_axis.size());
    for (int is = 0; is < static_cast<int>(map.signal_axis.size()); ++is)
        for (int ii = 0; ii < ni; ++ii) map.values.push_back(kernel.cell(is, ii));
    return map;
}

}  // namespace detail

Profile averaged_profile_matrix(const std::vector<double>& signal_axis,
                                const std::vector<double>& idler_axis,
                                const std::vector<double>& values,
                                const std::vector<double>* variances) {
    int ns = static_cast<int>(signal_axis.size());
    int ni = static_cast<int>(idler_axis.size());
    // values may be a background-subtracted excess, so only the peak must be
    // positive, not the total
    if (!(*std::max_element(values.begin(), values.end()) > 0.0))
        throw std::runtime_error("averaged profile: no positive values");

    double mid = 0.5 * (signal_axis.front() + signal_axis.back());
    std::vector<double> sum(ns, 0.0), var(ns, 0.0);
    std::vector<int> cnt(ns, 0);
    int used_columns = 0;
    for (int ii = 0; ii < ni; ++ii) {
        // ridge position from a parabolic vertex through the column maximum;
        // local, so robust against noisy or truncated column wings
        int k = 0;
        for (int is = 1; is < ns; ++is)
            if (values[is * ni + ii] > values[k * ni + ii]) k = is;
        if (!(values[k * ni + ii] > 0.0)) continue;
        double ridge = signal_axis[k];
        if (k > 0 && k + 1 < ns) {
            double vm = values[(k - 1) * ni + ii], v0 = values[k * ni + ii],
                   vp = values[(k + 1) * ni + ii];
            double denom = vm - 2.0 * v0 + vp;
            if (denom < 0.0) {
                double shift = 0.5 * (vm - vp) / denom;
                ridge += shift * (signal_axis[1] - signal_axis[0]);
            }
        }
        ++used_columns;
        // resample the column re-centered on its ridge
        for (int j = 0; j < ns; ++j) {
            double xq = ridge + (signal_axis[j] - mid);
            if (xq < signal_axis.front() || xq > signal_axis.back()) continue;
            int k = std::min(ns - 2, static_cast<int>((xq - signal_axis.front()) /
                                                      (signal_axis[1] - signal_axis[0])));
            double t = (xq - signal_axis[k]) / (signal_axis[k + 1] - signal_axis[k]);
            sum[j] += (1.0 - t) * values[k * ni + ii] + t * values[(k + 1) * ni + ii];
            if (variances) {
                var[j] += (1.0 - t) * (1.0 - t) * (*variances)[k * ni + ii] +
                          t * t * (*variances)[(k + 1) * ni + ii];
            }
            cnt[j]++;
        }
    }
    if (used_columns == 0) throw std::runtime_error("averaged profile: no usable idler columns");

    Profile prof;
    for (int j = 0; j < ns; ++j) {
        if (cnt[j] * 2 < used_columns) continue;  // require coverage by half the columns
        prof.x.push_back(signal_axis[j] - mid);
        prof.value.push_back(sum[j] / cnt[j]);
        prof.error.push_back(variances ? std::sqrt(var[j]) / cnt[j] : 0.0);
    }
    if (prof.x.empty()) throw std::runtime_error("averaged profile: re-centering left no coverage");
    double peak = *std::max_element(prof.value.begin(), prof.value.end());
    if (!(peak > 0.0)) throw std::runtime_error("averaged profile: zero peak");
    for (size_t j = 0; j < prof.value.size(); ++j) {
        prof.value[j] /= peak;
        prof.error[j] /= peak;
    }
    return prof;
}

Profile averaged_cross_section(const CorrelationMap& map) {
    return averaged_profile_matrix(map.signal_axis, map.idler_axis, map.values, nullptr);
}

double halfwidth_1e(const Profile& profile) {
    const auto& x = profile.x;
    const auto& y = profile.value;
    if (x.size() < 5) throw std::invalid_argument("halfwidth_1e: need at least 5 points");
    int imax = static_cast<int>(std::max_element(y.begin(), y.end()) - y.begin());
    double ymax = y[imax];
    double target = ymax / std::exp(1.0);

    auto crossing_halfwidth = [&]() -> double {
        double left = 0.0, right = 0.0;
        bool found_left = false, found_right = false;
        for (int i = imax; i > 0; --i) {
            if (y[i - 1] < target && y[i] >= target) {
                double t = (target - y[i - 1]) / (y[i] - y[i - 1]);
                left = x[i - 1] + t * (x[i] - x[i - 1]);
                found_left = true;
                break;
            }
        }
        for (int i = imax; i + 1 < static_cast<int>(y.size()); ++i) {
            if (y[i] >= target && y[i + 1] < target) {
                double t = (y[i] - target) / (y[i] - y[i + 1]);
                right = x[i] + t * (x[i + 1] - x[i]);
                found_right = true;
                break;
            }
        }
        if (!found_left || !found_right)
            throw std::runtime_error("halfwidth_1e: profile does not drop below 1/e inside range");
        return 0.5 * (right - left);
    };

    double w0 = crossing_halfwidth();  // also validates the range

    // single-Gaussian width by intensity-weighted parabola fit of the log
    // profile; linear in the parameters, so deterministic and free of the
    // iterate/fallback bistability a nonlinear fit would bring
    double m[3][4] = {};
    for (size_t i = 0; i < x.size(); ++i) {
        if (!(y[i] > 0.02 * ymax)) continue;
        double wgt = y[i] * y[i], l = std::log(y[i] / ymax);
        double p[3] = {1.0, x[i], x[i] * x[i]};
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) m[r][c] += wgt * p[r] * p[c];
            m[r][3] += wgt * p[r] * l;
        }
    }
    for (int r = 0; r < 3; ++r) {  // small Gaussian elimination with pivoting
        int piv = r;
        for (int k = r + 1; k < 3; ++k)
            if (std::abs(m[k][r]) > std::abs(m[piv][r])) piv = k;
        std::swap(m[r], m[piv]);
        if (std::abs(m[r][r]) < 1e-300) return w0;
        for (int k = r + 1; k < 3; ++k) {
            double f = m[k][r] / m[r][r];
            for (int c = r; c < 4; ++c) m[k][c] -= f * m[r][c];
        }
    }
    double cq = m[2][3] / m[2][2];
    if (!(cq < 0.0)) return w0;
    return 1.0 / std::sqrt(-cq);
}

void save_map_matrix(const CorrelationMap& map, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write map file: " + path);
    char buf[64];
    out << "# correlation map, axis=" << (map.axis == MapAxis::X ? "X" : "Y")
        << ", axes in mrad, rows=signal, cols=idler\n";
    out << "signal_mrad\\idler_mrad";
    for (double v : map.idler_axis) {
        std::snprintf(buf, sizeof buf, "\t%.9g", v * 1e3);
        out << buf;
    }
    out << "\n";
    int ni = static_cast<int>(map.idler_axis.size());
    for (size_t is = 0; is < map.signal_axis.size(); ++is) {
        std::snprintf(buf, sizeof buf, "%.9g", map.signal_axis[is] * 1e3);
        out << buf;
        for (int ii = 0; ii < ni; ++ii) {
            std::snprintf(buf, sizeof buf, "\t%.9g", map.values[is * ni + ii]);
            out << buf;
        }
        out << "\n";
    }
}

}  // namespace pfsim
