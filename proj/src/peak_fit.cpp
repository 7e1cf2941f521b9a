#include "pfsim/peak_fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pfsim {

namespace {

double rms(const std::vector<double>& r) {
    double s = 0.0;
    for (double v : r) s += v * v;
    return std::sqrt(s / r.size());
}

std::vector<double> residuals(const std::vector<double>& x, const std::vector<double>& y,
                              const std::vector<GaussPeak>& p) {
    std::vector<double> r(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        double model = 0.0;
        for (const auto& g : p) {
            double u = (x[i] - g.center) / g.width;
            model += g.amplitude * std::exp(-u * u);
        }
        r[i] = y[i] - model;
    }
    return r;
}

// solve A d = b in place, A symmetric positive-ish, partial pivoting
bool solve_linear(std::vector<double>& A, std::vector<double>& b, int n) {
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int row = col + 1; row < n; ++row)
            if (std::abs(A[row * n + col]) > std::abs(A[piv * n + col])) piv = row;
        if (std::abs(A[piv * n + col]) < 1e-300) return false;
        if (piv != col) {
            for (int k = 0; k < n; ++k) std::swap(A[col * n + k], A[piv * n + k]);
            std::swap(b[col], b[piv]);
        }
        for (int row = col + 1; row < n; ++row) {
            double f = A[row * n + col] / A[col * n + col];
            for (int k = col; k < n; ++k) A[row * n + k] -= f * A[col * n + k];
            b[row] -= f * b[col];
        }
    }
    for (int row = n - 1; row >= 0; --row) {
        double s = b[row];
        for (int k = row + 1; k < n; ++k) s -= A[row * n + k] * b[k];
        b[row] = s / A[row * n + row];
    }
    return true;
}

}  // namespace

PeakFitResult fit_gaussians_from(const std::vector<double>& x, const std::vector<double>& y,
                                 std::vector<GaussPeak> p) {
    const int np = static_cast<int>(p.size());
    const int n = 3 * np;
    const int max_iter = 500;
    const double step_tol = 1e-9;

    auto pack_cost = [&](const std::vector<GaussPeak>& q) { return rms(residuals(x, y, q)); };

    double lambda = 1e-3;
    double cost = pack_cost(p);
    PeakFitResult best{p, cost, 0};

    for (int iter = 1; iter <= max_iter; ++iter) {
        // Jacobian of residual r_i = y_i - model_i
        std::vector<double> JTJ(n * n, 0.0), JTr(n, 0.0);
        auto r = residuals(x, y, p);
        for (size_t i = 0; i < x.size(); ++i) {
            std::vector<double> row(n);
            for (int j = 0; j < np; ++j) {
                double u = (x[i] - p[j].center) / p[j].width;
                double e = std::exp(-u * u);
                row[3 * j + 0] = e;
                row[3 * j + 1] = p[j].amplitude * e * 2.0 * u / p[j].width;
                row[3 * j + 2] = p[j].amplitude * e * 2.0 * u * u / p[j].width;
            }
            for (int a = 0; a < n; ++a) {
                JTr[a] += row[a] * r[i];
                for (int b = a; b < n; ++b) JTJ[a * n + b] += row[a] * row[b];
            }
        }
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < a; ++b) JTJ[a * n + b] = JTJ[b * n + a];

        std::vector<double> A = JTJ, d = JTr;
        for (int a = 0; a < n; ++a) A[a * n + a] += lambda * (JTJ[a * n + a] + 1e-12);
        if (!solve_linear(A, d, n)) {
            lambda *= 10.0;
            if (lambda > 1e12) throw FitNotConverged("fit_gaussians: singular normal equations", best);
            continue;
        }

        std::vector<GaussPeak> trial = p;
        double rel_step = 0.0;
        for (int j = 0; j < np; ++j) {
            trial[j].amplitude += d[3 * j + 0];
            trial[j].center += d[3 * j + 1];
            trial[j].width += d[3 * j + 2];
            trial[j].width = std::abs(trial[j].width);
            if (trial[j].width < 1e-300) trial[j].width = 1e-300;
            for (int k = 0; k < 3; ++k) {
                double base = std::abs(k == 0 ? p[j].amplitude : (k == 1 ? p[j].center : p[j].width));
                rel_step = std::max(rel_step, std::abs(d[3 * j + k]) / (base + 1e-30));
            }
        }
        double trial_cost = pack_cost(trial);
        if (trial_cost <= cost) {
            p = trial;
            cost = trial_cost;
            lambda = std::max(lambda * 0.3, 1e-12);
            if (cost < best.rms_residual) best = {p, cost, iter};
            if (rel_step < step_tol) return {p, cost, iter};
        } else {
            lambda *= 10.0;
            if (lambda > 1e14) {
                // cannot move: treat as converged at the current point
                return {p, cost, iter};
            }
        }
    }
    best.iterations = max_iter;
    throw FitNotConverged("fit_gaussians: iteration cap reached", best);
}

PeakFitResult fit_gaussians(const std::vector<double>& x, const std::vector<double>& y,
                            int n_peaks) {
    if (n_peaks < 1) throw std::invalid_argument("fit_gaussians: n_peaks must be >= 1");
    if (x.size() != y.size() || static_cast<int>(x.size()) < 3 * n_peaks + 1)
        throw std::invalid_argument("fit_gaussians: need at least 3*n_peaks + 1 samples");
    double ymax = *std::max_element(y.begin(), y.end());
    if (!(ymax > 0.0))
        throw FitNotConverged("fit_gaussians: degenerate all-zero input",
                              PeakFitResult{std::vector<GaussPeak>(n_peaks), 0.0, 0});

    // moving-average smoothing before seeding peak centers
    const int n = static_cast<int>(x.size());
    int half = std::max(1, n / 40);
    std::vector<double> smooth(n);
    for (int i = 0; i < n; ++i) {
        int lo = std::max(0, i - half), hi = std::min(n - 1, i + half);
        double s = 0.0;
        for (int k = lo; k <= hi; ++k) s += y[k];
        smooth[i] = s / (hi - lo + 1);
    }
    struct Cand {
        double value;
        int index;
    };
    std::vector<Cand> maxima;
    for (int i = 0; i < n; ++i) {
        bool is_max = (i == 0 || smooth[i] >= smooth[i - 1]) &&
                      (i == n - 1 || smooth[i] > smooth[i + 1]);
        if (is_max) maxima.push_back({smooth[i], i});
    }
    std::stable_sort(maxima.begin(), maxima.end(), [&](const Cand& a, const Cand& b) {
        if (a.value != b.value) return a.value > b.value;
        return x[a.index] < x[b.index];  // equal maxima: lower coordinate first
    });

    double span = *std::max_element(x.begin(), x.end()) - *std::min_element(x.begin(), x.end());
    double step = span / (n - 1);
    std::vector<GaussPeak> start(n_peaks);
    for (int j = 0; j < n_peaks; ++j) {
        int idx = j < static_cast<int>(maxima.size())
                      ? maxima[j].index
                      : (n - 1) * (j + 1) / (n_peaks + 1);
        // seed each width from the smoothed profile's local half-maximum
        // extent; a shared span-based guess is far too wide for well-separated
        // narrow peaks and lets a component escape to a flat background
        double half_level = 0.5 * smooth[idx];
        int lo = idx, hi = idx;
        while (lo > 0 && smooth[lo - 1] > half_level && smooth[lo - 1] <= smooth[lo]) --lo;
        while (hi < n - 1 && smooth[hi + 1] > half_level && smooth[hi + 1] <= smooth[hi]) ++hi;
        double hwhm = 0.5 * (x[hi] - x[lo]);
        double w0 = std::clamp(hwhm / 0.8326, 2.0 * step, span / (2.0 * n_peaks));
        start[j] = {std::max(y[idx], 1e-6 * ymax), x[idx], w0};
    }
    std::stable_sort(start.begin(), start.end(),
                     [](const GaussPeak& a, const GaussPeak& b) { return a.center < b.center; });
    return fit_gaussians_from(x, y, std::move(start));
}

}  // namespace pfsim
