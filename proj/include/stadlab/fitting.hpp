#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "stadlab/common.hpp"

namespace stadlab {

/// Least-squares power-law fit log10(y) = exponent * log10(x) + intercept.
/// The residual is the RMS misfit in decades (base-10 log space); the
/// exponent is base-invariant.
struct FitReport {
    double exponent = 0.0;
    double intercept = 0.0;
    std::array<double, 2> window{0.0, 0.0};
    double residual = 0.0;  ///< RMS of the log10-space misfit
    int n_points = 0;
};

/// Fit y ~ C * x^alpha by least squares in log space over xs in
/// [window_lo, window_hi]. Deterministic; requires at least 3 in-window
/// points and strictly positive data.
inline FitReport fit_power_law(const std::vector<double>& xs,
                               const std::vector<double>& ys,
                               double window_lo, double window_hi) {
    if (xs.size() != ys.size())
        throw Error("fit_power_law: xs and ys length mismatch");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] < window_lo || xs[i] > window_hi) continue;
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
            throw Error("fit_power_law: data must be strictly positive");
        lx.push_back(std::log10(xs[i]));
        ly.push_back(std::log10(ys[i]));
    }
    const int n = static_cast<int>(lx.size());
    if (n < 3) throw Error("fit_power_law: fewer than 3 points in the fit window");

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    // denom = n^2 * Var(log10 x); rounding leaves a nonzero residue even for
    // identical abscissae, so test it against the magnitude of its two terms.
    const double denom = n * sxx - sx * sx;
    if (!(denom > 1e-12 * (n * sxx + sx * sx)))
        throw Error("fit_power_law: degenerate abscissae (all x equal)");

    FitReport report;
    report.exponent = (n * sxy - sx * sy) / denom;
    report.intercept = (sy - report.exponent * sx) / n;
    report.window = {window_lo, window_hi};
    report.n_points = n;
    double ss = 0;
    for (int i = 0; i < n; ++i) {
        const double r = ly[i] - (report.exponent * lx[i] + report.intercept);
        ss += r * r;
    }
    report.residual = std::sqrt(ss / n);
    return report;
}

/// Effective decay exponent of an energy trace after removing the
/// logarithmic factor: substitute y = sqrt(E) * (ln t)^-(k/2+1) and fit
/// y ~ C * t^-p for t >= 2. The reported exponent is p (positive means
/// decay), directly comparable with the k/2 or k/(1+4/m) rates.
inline FitReport fit_decay_with_log(const std::vector<double>& ts,
                                    const std::vector<double>& es, int k) {
    if (ts.size() != es.size())
        throw Error("fit_decay_with_log: ts and es length mismatch");
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (ts[i] < 2.0) continue;
        if (!(es[i] > 0.0))
            throw Error("fit_decay_with_log: energies must be strictly positive");
        xs.push_back(ts[i]);
        ys.push_back(std::sqrt(es[i]) *
                     std::pow(std::log(ts[i]), -(0.5 * k + 1.0)));
    }
    if (xs.size() < 3)
        throw Error("fit_decay_with_log: need at least 3 samples with t >= 2");
    FitReport report = fit_power_law(xs, ys, xs.front(), xs.back());
    report.exponent = -report.exponent;
    return report;
}

}  // namespace stadlab
