#include "pfsim/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "pfsim/constants.hpp"
#include "pfsim/rng.hpp"
#include "freq_table.hpp"

namespace pfsim {

void PairDensityTable::unflatten(std::size_t flat, int& igs, int& ibs, int& igi, int& ibi) const {
    ibi = static_cast<int>(flat % beta_i.cells);
    flat /= beta_i.cells;
    igi = static_cast<int>(flat % gamma_i.cells);
    flat /= gamma_i.cells;
    ibs = static_cast<int>(flat % beta_s.cells);
    igs = static_cast<int>(flat / beta_s.cells);
}

namespace {

PairDensityTable build_table_impl(const BiphotonConfig& config, const DetectorModel& det,
                                  const EmissionGeometry& geom, const AngularGrid& grid,
                                  int pump_freq_nodes, bool parallel) {
    grid.validate();
    detail::FreqKernel fk = detail::make_freq_kernel(config, det, geom, grid, pump_freq_nodes);
    PairDensityTable table;
    table.gamma_s = grid.signal_gamma;
    table.beta_s = grid.signal_beta;
    table.gamma_i = grid.idler_gamma;
    table.beta_i = grid.idler_beta;
    std::size_t n = static_cast<std::size_t>(grid.signal_gamma.cells) * grid.signal_beta.cells *
                    grid.idler_gamma.cells * grid.idler_beta.cells;
    table.density.assign(n, 0.0);
    auto eval = [&](std::size_t flat) {
        int igs, ibs, igi, ibi;
        table.unflatten(flat, igs, ibs, igi, ibi);
        double gs = table.gamma_s.center(igs);
        double bs = table.beta_s.center(ibs);
        double gi = table.gamma_i.center(igi);
        double bi = table.beta_i.center(ibi);
        return fk.density(gs, bs, gi, bi);
    };
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (long long flat = 0; flat < static_cast<long long>(n); ++flat)
            table.density[flat] = eval(static_cast<std::size_t>(flat));
    } else {
        for (std::size_t flat = 0; flat < n; ++flat) table.density[flat] = eval(flat);
    }
    table.cdf.resize(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += table.density[i];
        table.cdf[i] = acc;
    }
    table.total = acc;
    return table;
}

}  // namespace

PairDensityTable build_density_table(const BiphotonConfig& config, const DetectorModel& det,
                                     const EmissionGeometry& geom, const AngularGrid& grid,
                                     int pump_freq_nodes) {
    return build_table_impl(config, det, geom, grid, pump_freq_nodes, true);
}

namespace detail {
PairDensityTable build_density_table_serial(const BiphotonConfig& config, const DetectorModel& det,
                                            const EmissionGeometry& geom, const AngularGrid& grid,
                                            int pump_freq_nodes) {
    return build_table_impl(config, det, geom, grid, pump_freq_nodes, false);
}
}  // namespace detail

std::vector<SampledPair> sample_pairs(const PairDensityTable& table, std::size_t count,
                                      std::mt19937_64& rng) {
    if (count > 0 && !(table.total > 0.0))
        throw std::runtime_error("sample_pairs: all-zero density table");
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<SampledPair> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        double target = uni(rng) * table.total;
        auto it = std::upper_bound(table.cdf.begin(), table.cdf.end(), target);
        if (it == table.cdf.end()) --it;
        std::size_t flat = static_cast<std::size_t>(it - table.cdf.begin());
        int igs, ibs, igi, ibi;
        table.unflatten(flat, igs, ibs, igi, ibi);
        SampledPair p;
        p.gamma_s = table.gamma_s.lo + (igs + uni(rng)) * table.gamma_s.step();
        p.beta_s = table.beta_s.lo + (ibs + uni(rng)) * table.beta_s.step();
        p.gamma_i = table.gamma_i.lo + (igi + uni(rng)) * table.gamma_i.step();
        p.beta_i = table.beta_i.lo + (ibi + uni(rng)) * table.beta_i.step();
        out.push_back(p);
    }
    return out;
}

std::size_t cell_of(const PairDensityTable& table, const SampledPair& pair) {
    auto locate = [](const AxisRange& ax, double v) {
        int i = static_cast<int>((v - ax.lo) / ax.step());
        return std::clamp(i, 0, ax.cells - 1);
    };
    return table.index(locate(table.gamma_s, pair.gamma_s), locate(table.beta_s, pair.beta_s),
                       locate(table.gamma_i, pair.gamma_i), locate(table.beta_i, pair.beta_i));
}

ModePair to_mode_pair(const BiphotonConfig& config, const EmissionGeometry& geom,
                      const SampledPair& pair, double omega_s, double omega_i) {
    const auto& mat = config.crystal.material;
    double ks0 = omega_s / c_light, ki0 = omega_i / c_light;
    ModePair mp;
    mp.signal = make_mode(omega_s, ks0 * std::sin(geom.signal_center_gamma + pair.gamma_s),
                          ks0 * std::sin(pair.beta_s), Polarization::ordinary, mat);
    mp.idler = make_mode(omega_i, ki0 * std::sin(geom.idler_center_gamma + pair.gamma_i),
                         ki0 * std::sin(pair.beta_i), Polarization::ordinary, mat);
    return mp;
}

namespace {

// uniform super-pixel draw over a list of strips, area-weighted
FrameEvent uniform_strip_event(const std::vector<const StripROI*>& strips, EventOrigin origin,
                               std::mt19937_64& rng) {
    int total = 0;
    for (const auto* s : strips) total += s->superpixel_count();
    std::uniform_int_distribution<int> pick(0, total - 1);
    int k = pick(rng);
    for (const auto* s : strips) {
        if (k < s->superpixel_count()) {
            FrameEvent ev;
            ev.strip = s->role;
            ev.col = s->col0 + k % s->cols();
            ev.row = s->row0 + k / s->cols();
            ev.origin = origin;
            return ev;
        }
        k -= s->superpixel_count();
    }
    throw std::logic_error("uniform_strip_event: empty strip list");
}

}  // namespace

Frame simulate_frame(const PairDensityTable& table, const FrameSimConfig& sim,
                     const CameraModel& camera, const DetectionGeometry& geom,
                     std::uint64_t master_seed, std::uint64_t frame_index,
                     SessionSummary* stats) {
    sim.noise.validate();
    std::mt19937_64 rng = make_rng(master_seed, frame_index);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    Frame frame;
    frame.index = frame_index;
    std::uint64_t dropped = 0, merged = 0;

    std::poisson_distribution<int> pair_count(sim.pairs_per_gate);
    int n_pairs = sim.pairs_per_gate > 0.0 ? pair_count(rng) : 0;
    std::vector<SampledPair> pairs = sample_pairs(table, n_pairs, rng);

    std::vector<FrameEvent> raw;
    for (const auto& p : pairs) {
        if (uni(rng) < sim.quantum_efficiency) {
            // table angles are strip-relative, the camera mapping is absolute
            auto ev = angle_to_pixel(geom, camera, geom.signal_strip,
                                     geom.signal_strip.center_gamma + p.gamma_s,
                                     geom.signal_strip.center_beta + p.beta_s,
                                     sim.apply_psf, rng);
            if (ev) {
                ev->origin = EventOrigin::pair_signal;
                raw.push_back(*ev);
            } else {
                ++dropped;
            }
        }
        if (uni(rng) < sim.quantum_efficiency) {
            auto ev = angle_to_pixel(geom, camera, geom.idler_strip,
                                     geom.idler_strip.center_gamma + p.gamma_i,
                                     geom.idler_strip.center_beta + p.beta_i,
                                     sim.apply_psf, rng);
            if (ev) {
                ev->origin = EventOrigin::pair_idler;
                raw.push_back(*ev);
            } else {
                ++dropped;
            }
        }
    }

    // noise tied to the realized detections so the expected fraction matches the budget
    std::uint64_t n_signal_det = raw.size();
    if (sim.noise.fraction > 0.0 && n_signal_det > 0) {
        double mean_noise = n_signal_det * sim.noise.fraction / (1.0 - sim.noise.fraction);
        std::poisson_distribution<int> noise_count(mean_noise);
        int m = noise_count(rng);
        std::vector<const StripROI*> lit = {&geom.signal_strip, &geom.idler_strip};
        std::vector<const StripROI*> all = {&geom.signal_strip, &geom.idler_strip,
                                            &geom.noise_strip};
        for (int i = 0; i < m; ++i) {
            double u = uni(rng);
            if (u < sim.noise.fluorescence_share) {
                raw.push_back(uniform_strip_event(lit, EventOrigin::fluorescence, rng));
            } else if (u < sim.noise.fluorescence_share + sim.noise.dark_share) {
                raw.push_back(uniform_strip_event(all, EventOrigin::dark, rng));
            } else {
                raw.push_back(uniform_strip_event(lit, EventOrigin::scattered_pump, rng));
            }
        }
    }

    // one record per occupied super-pixel; the camera cannot resolve pileup
    std::unordered_set<std::uint64_t> occupied;
    occupied.reserve(raw.size() * 2);
    for (const auto& ev : raw) {
        std::uint64_t key = (static_cast<std::uint64_t>(ev.col) << 20) | ev.row;
        if (!occupied.insert(key).second) {
            ++merged;
            continue;
        }
        frame.events.push_back(ev);
    }

    if (stats) {
        stats->frames += 1;
        stats->dropped += dropped;
        stats->merged_pileup += merged;
        for (const auto& ev : frame.events) {
            switch (ev.origin) {
                case EventOrigin::pair_signal: stats->pair_signal++; break;
                case EventOrigin::pair_idler: stats->pair_idler++; break;
                case EventOrigin::fluorescence: stats->fluorescence++; break;
                case EventOrigin::scattered_pump: stats->scattered_pump++; break;
                case EventOrigin::dark: stats->dark++; break;
            }
        }
    }
    return frame;
}

namespace {

std::vector<Frame> session_impl(const PairDensityTable& table, const FrameSimConfig& sim,
                                const CameraModel& camera, const DetectionGeometry& geom,
                                std::uint64_t n_frames, std::uint64_t master_seed,
                                SessionSummary* summary, bool parallel) {
    if (n_frames < 1) throw std::invalid_argument("simulate_session: need at least one frame");
    geom.validate(camera);
    std::vector<Frame> frames(n_frames);
    if (parallel) {
#pragma omp parallel
        {
            SessionSummary local;
#pragma omp for schedule(static)
            for (long long i = 0; i < static_cast<long long>(n_frames); ++i)
                frames[i] = simulate_frame(table, sim, camera, geom, master_seed,
                                           static_cast<std::uint64_t>(i),
                                           summary ? &local : nullptr);
            if (summary) {
#pragma omp critical
                {
                    summary->frames += local.frames;
                    summary->pair_signal += local.pair_signal;
                    summary->pair_idler += local.pair_idler;
                    summary->fluorescence += local.fluorescence;
                    summary->scattered_pump += local.scattered_pump;
                    summary->dark += local.dark;
                    summary->dropped += local.dropped;
                    summary->merged_pileup += local.merged_pileup;
                }
            }
        }
    } else {
        for (std::uint64_t i = 0; i < n_frames; ++i)
            frames[i] = simulate_frame(table, sim, camera, geom, master_seed, i, summary);
    }
    return frames;
}

}  // namespace

std::vector<Frame> simulate_session(const PairDensityTable& table, const FrameSimConfig& sim,
                                    const CameraModel& camera, const DetectionGeometry& geom,
                                    std::uint64_t n_frames, std::uint64_t master_seed,
                                    SessionSummary* summary) {
    return session_impl(table, sim, camera, geom, n_frames, master_seed, summary, true);
}

namespace detail {
std::vector<Frame> simulate_session_serial(const PairDensityTable& table,
                                           const FrameSimConfig& sim, const CameraModel& camera,
                                           const DetectionGeometry& geom, std::uint64_t n_frames,
                                           std::uint64_t master_seed, SessionSummary* summary) {
    return session_impl(table, sim, camera, geom, n_frames, master_seed, summary, false);
}
}  // namespace detail

}  // namespace pfsim
