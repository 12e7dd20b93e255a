#pragma once

// Poincare exponent estimation from truncated orbit data: the slope of
// log N(T) against T, where N(T) counts enumerated group elements g with
// d(o, g o) <= T.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "kspec/error.hpp"
#include "kspec/kleinian.hpp"
#include "kspec/regression.hpp"

namespace kspec {

struct OrbitCountingCurve {
    std::vector<double> thresholds;
    std::vector<std::size_t> counts;
    int max_word_len = 0;
    int boundary_dim = 1;
    /// Smallest displacement among words of the maximal length: below it the
    /// counts at max_word_len and max_word_len - 1 coincide. +inf when the
    /// enumeration never reached max_word_len.
    double saturation = std::numeric_limits<double>::infinity();
};

inline OrbitCountingCurve orbit_counting_curve(const OrbitSample& sample, std::span<const double> grid) {
    require(sample.size() >= 1, "orbit_counting_curve: empty sample");
    require(!grid.empty(), "orbit_counting_curve: empty threshold grid");
    for (std::size_t i = 1; i < grid.size(); ++i)
        require(grid[i] > grid[i - 1], "orbit_counting_curve: thresholds must be increasing");
    OrbitCountingCurve c;
    c.max_word_len = sample.max_len();
    c.boundary_dim = sample.base().dim() - 1;
    std::vector<double> d = sample.displacements();
    if (sample.max_len() >= 1)
        for (std::size_t i = 0; i < sample.size(); ++i)
            if (sample.length(i) == sample.max_len()) c.saturation = std::min(c.saturation, sample.displacement(i));
    std::sort(d.begin(), d.end());
    c.thresholds.assign(grid.begin(), grid.end());
    for (double t : grid)
        c.counts.push_back(static_cast<std::size_t>(std::upper_bound(d.begin(), d.end(), t + 1e-12) - d.begin()));
    return c;
}

/// Uniform grid of `points` thresholds on [0, T_sat] (or [0, max
/// displacement] when unsaturated; [0, 10] for the trivial group).
inline std::vector<double> default_delta_grid(const OrbitSample& sample, int points = 60) {
    require(points >= 2, "default_delta_grid: need at least two points");
    double top = std::numeric_limits<double>::infinity();
    if (sample.max_len() >= 1)
        for (std::size_t i = 0; i < sample.size(); ++i)
            if (sample.length(i) == sample.max_len()) top = std::min(top, sample.displacement(i));
    if (!std::isfinite(top)) top = *std::max_element(sample.displacements().begin(), sample.displacements().end());
    if (top <= 0.0) top = 10.0;
    std::vector<double> g;
    for (int i = 0; i < points; ++i) g.push_back(top * i / (points - 1));
    return g;
}

struct DeltaOptions {
    /// Fraction of the pre-saturation thresholds dropped at the top
    /// (truncation bias) and at the bottom.
    double drop_top = 0.2;
    double drop_bottom = 0.0;
    /// Thresholds whose count is below this are skipped: a handful of short
    /// elements makes log N a staircase with no usable slope.
    std::size_t min_count = 5;
    std::size_t min_points = 5;
};

struct DeltaEstimate {
    double delta = 0.0;
    double std_error = 0.0;
    bool clamped = false;
    std::size_t window_points = 0;
    double window_lo = 0.0, window_hi = 0.0;
    std::string warning;
};

inline DeltaEstimate estimate_delta(const OrbitCountingCurve& curve, const DeltaOptions& opt = {}) {
    require(!curve.counts.empty(), "estimate_delta: empty curve");
    if (curve.counts.front() == curve.counts.back() && !std::isfinite(curve.saturation)) {
        // the whole (finite) orbit is inside the first threshold: the series
        // converges for every s > 0
        DeltaEstimate e;
        e.window_points = curve.counts.size();
        e.window_lo = curve.thresholds.front();
        e.window_hi = curve.thresholds.back();
        return e;
    }
    std::vector<std::size_t> below;
    for (std::size_t i = 0; i < curve.thresholds.size(); ++i)
        if (curve.thresholds[i] < curve.saturation) below.push_back(i);
    if (below.size() < opt.min_points)
        throw EstimatorError("estimate_delta: only " + std::to_string(below.size()) +
                             " thresholds below saturation; increase max_word_len");
    const auto m = below.size();
    const auto lo = static_cast<std::size_t>(std::floor(opt.drop_bottom * static_cast<double>(m)));
    const auto hi = m - static_cast<std::size_t>(std::floor(opt.drop_top * static_cast<double>(m)));
    if (hi <= lo || hi - lo < opt.min_points)
        throw EstimatorError("estimate_delta: pre-saturation window too small; increase max_word_len");
    std::vector<double> x, y;
    for (std::size_t k = lo; k < hi; ++k) {
        const std::size_t i = below[k];
        if (curve.counts[i] < opt.min_count) continue;
        x.push_back(curve.thresholds[i]);
        y.push_back(std::log(static_cast<double>(curve.counts[i])));
    }
    if (x.size() < opt.min_points)
        throw EstimatorError("estimate_delta: only " + std::to_string(x.size()) +
                             " usable thresholds in the window; increase max_word_len");
    const LinearFit fit = fit_line(x, y);
    DeltaEstimate e;
    e.delta = fit.slope;
    e.std_error = fit.slope_stderr;
    e.window_points = x.size();
    e.window_lo = x.front();
    e.window_hi = x.back();
    const double dmax = static_cast<double>(curve.boundary_dim);
    if (e.delta < 0.0 || e.delta > dmax) {
        e.clamped = true;
        e.warning = "delta estimate " + std::to_string(e.delta) + " clamped to [0, " + std::to_string(curve.boundary_dim) + "]";
        e.delta = std::clamp(e.delta, 0.0, dmax);
    }
    return e;
}

/// Cross-check: the exponent s at which the last two word-length shells of
/// the Poincare series carry equal mass, found by bisection on [0, d].
inline double poincare_shell_balance(const OrbitSample& sample) {
    const int L = sample.max_len();
    require(L >= 2, "poincare_shell_balance: need max_len >= 2");
    auto shell = [&](int len, double s) {
        double acc = 0.0;
        for (std::size_t i = 0; i < sample.size(); ++i)
            if (sample.length(i) == len) acc += std::exp(-s * sample.displacement(i));
        return acc;
    };
    double lo = 0.0, hi = static_cast<double>(sample.base().dim() - 1);
    if (shell(L, hi) >= shell(L - 1, hi)) return hi;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (shell(L, mid) >= shell(L - 1, mid) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace kspec
