#pragma once

// Brute-force two-scale covering estimators for point clouds, the
// measure-ratio sweep for measure models, and the slab check near a cusp.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "kspec/error.hpp"
#include "kspec/formulas.hpp"
#include "kspec/measure.hpp"
#include "kspec/parallel.hpp"
#include "kspec/regression.hpp"
#include "kspec/sampler.hpp"

namespace kspec {

enum class CoveringMethod { grid_boxes, exact_1d };

inline const char* to_string(CoveringMethod m) { return m == CoveringMethod::grid_boxes ? "grid-boxes" : "exact-1d"; }

inline std::optional<CoveringMethod> parse_covering_method(std::string_view s) {
    if (s == "grid-boxes") return CoveringMethod::grid_boxes;
    if (s == "exact-1d") return CoveringMethod::exact_1d;
    return std::nullopt;
}

/// Closed Euclidean ball in the chart.
struct Ball2 {
    Point2 center{0, 0};
    double radius = 0.0;
};

namespace detail {

inline double box_floor(double v, double side) { return std::floor(v / side); }

/// Occupied boxes of side h in a sorted cloud, grouped by column, so a ball
/// query only visits occupied boxes.
class BoxIndex {
  public:
    BoxIndex(const std::vector<Point2>& pts, double h) : pts_(&pts), h_(h) {
        std::vector<std::tuple<std::int64_t, std::int64_t, std::uint32_t>> keyed;
        keyed.reserve(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i)
            keyed.emplace_back(static_cast<std::int64_t>(box_floor(pts[i][0], h)),
                               static_cast<std::int64_t>(box_floor(pts[i][1], h)), static_cast<std::uint32_t>(i));
        std::sort(keyed.begin(), keyed.end());
        order_.reserve(keyed.size());
        for (std::size_t i = 0; i < keyed.size(); ++i) {
            const auto [bx, by, idx] = keyed[i];
            order_.push_back(idx);
            if (boxes_.empty() || boxes_.back().bx != bx || boxes_.back().by != by) {
                if (columns_.empty() || columns_.back().bx != bx) columns_.push_back({bx, boxes_.size(), 0});
                boxes_.push_back({bx, by, i, i});
            }
            boxes_.back().end = i + 1;
            columns_.back().end = boxes_.size();
        }
    }

    std::size_t occupied() const { return boxes_.size(); }

    std::size_t count_in_ball(const Ball2& b) const {
        const double R = b.radius, h = h_;
        const auto x0 = static_cast<std::int64_t>(box_floor(b.center[0] - R, h));
        const auto x1 = static_cast<std::int64_t>(box_floor(b.center[0] + R, h));
        const auto y0 = static_cast<std::int64_t>(box_floor(b.center[1] - R, h));
        const auto y1 = static_cast<std::int64_t>(box_floor(b.center[1] + R, h));
        auto col = std::lower_bound(columns_.begin(), columns_.end(), x0, [](const Column& c, std::int64_t v) { return c.bx < v; });
        std::size_t n = 0;
        for (; col != columns_.end() && col->bx <= x1; ++col) {
            auto box = std::lower_bound(boxes_.begin() + static_cast<std::ptrdiff_t>(col->begin),
                                        boxes_.begin() + static_cast<std::ptrdiff_t>(col->end), y0,
                                        [](const Box& bx, std::int64_t v) { return bx.by < v; });
            for (; box != boxes_.begin() + static_cast<std::ptrdiff_t>(col->end) && box->by <= y1; ++box)
                if (box_meets(*box, b)) ++n;
        }
        return n;
    }

  private:
    struct Box {
        std::int64_t bx, by;
        std::size_t begin, end;
    };
    struct Column {
        std::int64_t bx;
        std::size_t begin, end;
    };

    bool box_meets(const Box& box, const Ball2& b) const {
        const double lx = static_cast<double>(box.bx) * h_, ly = static_cast<double>(box.by) * h_;
        const double fx = std::max(std::abs(b.center[0] - lx), std::abs(b.center[0] - lx - h_));
        const double fy = std::max(std::abs(b.center[1] - ly), std::abs(b.center[1] - ly - h_));
        if (fx * fx + fy * fy <= b.radius * b.radius) return true;  // box inside the ball
        for (std::size_t k = box.begin; k < box.end; ++k) {
            const auto& p = (*pts_)[order_[k]];
            if (std::hypot(p[0] - b.center[0], p[1] - b.center[1]) <= b.radius) return true;
        }
        return false;
    }

    const std::vector<Point2>* pts_;
    double h_;
    std::vector<std::uint32_t> order_;
    std::vector<Box> boxes_;
    std::vector<Column> columns_;
};

inline std::size_t exact_cover_1d(const std::vector<Point2>& pts, double lo, double hi, double r) {
    auto less_x = [](const Point2& p, double v) { return p[0] < v; };
    auto it = std::lower_bound(pts.begin(), pts.end(), lo, less_x);
    std::size_t n = 0;
    while (it != pts.end() && (*it)[0] <= hi) {
        ++n;
        const double reach = (*it)[0] + 2.0 * r;
        it = std::upper_bound(it, pts.end(), reach, [](double v, const Point2& p) { return v < p[0]; });
    }
    return n;
}

inline std::size_t grid_cover_1d(const std::vector<Point2>& pts, double lo, double hi, double h) {
    auto less_x = [](const Point2& p, double v) { return p[0] < v; };
    auto it = std::lower_bound(pts.begin(), pts.end(), lo, less_x);
    std::size_t n = 0;
    while (it != pts.end() && (*it)[0] <= hi) {
        ++n;
        const double b = box_floor((*it)[0], h);
        it = std::lower_bound(it, pts.end(), (b + 1.0) * h, less_x);
        // (b + 1) h and x / h round independently; skip what still floors to b
        while (it != pts.end() && box_floor((*it)[0], h) <= b) ++it;
    }
    return n;
}

}  // namespace detail

/// Covering number of cloud ∩ target at radius r. grid_boxes counts occupied
/// boxes of side 2r (the diameter of an r-ball) containing a point of the
/// target; exact_1d runs the greedy left-to-right cover by intervals of
/// length 2r, which is optimal on the line.
inline std::size_t covering_number(const PointCloud& cloud, const std::optional<Ball2>& target, double r,
                                   CoveringMethod method) {
    require(r > 0.0 && std::isfinite(r), "covering_number: r must be positive");
    const auto& pts = cloud.points();
    if (cloud.dim() == 1) {
        const double lo = target ? target->center[0] - target->radius : pts.front()[0];
        const double hi = target ? target->center[0] + target->radius : pts.back()[0];
        return method == CoveringMethod::exact_1d ? detail::exact_cover_1d(pts, lo, hi, r)
                                                  : detail::grid_cover_1d(pts, lo, hi, 2.0 * r);
    }
    require(method == CoveringMethod::grid_boxes, "covering_number: exact_1d needs a one-dimensional cloud");
    const detail::BoxIndex index(pts, 2.0 * r);
    return target ? index.count_in_ball(*target) : index.occupied();
}

struct TwoScaleRecord {
    Point2 center{0, 0};
    double r = 0.0;
    double theta = 0.0;
    std::size_t count = 0;
};

namespace detail {

inline bool is_cloud_point(const PointCloud& cloud, const Point2& x) {
    const double tol = cloud.resolution() / 10.0;
    const auto& pts = cloud.points();
    auto it = std::lower_bound(pts.begin(), pts.end(), x[0] - tol, [](const Point2& p, double v) { return p[0] < v; });
    for (; it != pts.end() && (*it)[0] <= x[0] + tol; ++it)
        if (std::hypot((*it)[0] - x[0], (*it)[1] - x[1]) <= tol) return true;
    return false;
}

}  // namespace detail

/// N_r(B(x, r^theta) ∩ cloud).
inline TwoScaleRecord two_scale_count(const PointCloud& cloud, const Point2& x, double r, double theta,
                                      CoveringMethod method) {
    detail::check_theta(theta);
    require(r > 0.0 && r < 1.0, "two_scale_count: r must lie in (0, 1)");
    require(detail::is_cloud_point(cloud, x), "two_scale_count: center is not a cloud point");
    return {x, r, theta, covering_number(cloud, Ball2{x, std::pow(r, theta)}, r, method)};
}

struct CenterStrategy {
    enum class Mode { all, stratified } mode = Mode::stratified;
    std::size_t n = 2000;
};

struct EstimatorConfig {
    std::vector<double> theta_grid{0.25, 0.5, 0.75};
    /// Scale window in units of the normalised cloud (diameter <= 1).
    /// r_min = 0 means 10 * resolution.
    double r_min = 0.0;
    double r_max = 1e-2;
    int scales_per_decade = 4;
    CenterStrategy centers;
    CoveringMethod method = CoveringMethod::grid_boxes;
};

/// The cloud rescaled to diameter at most 1, with the factor applied.
struct NormalizedCloud {
    PointCloud cloud;
    double scale = 1.0;
};

inline NormalizedCloud normalize_cloud(const PointCloud& cloud) {
    const double diam = cloud.diameter();
    if (diam <= 1.0) return {cloud, 1.0};
    const double s = 1.0 / diam;
    std::vector<Point2> pts = cloud.points();
    for (auto& p : pts) p = {p[0] * s, p[1] * s};
    std::vector<FlaggedRegion> flags = cloud.flagged();
    for (auto& f : flags) f = {{f.center[0] * s, f.center[1] * s}, f.radius * s};
    return {PointCloud(cloud.dim(), std::move(pts), cloud.resolution() * s, cloud.provenance(), std::move(flags)), s};
}

/// Resolved scale grid r_min * 10^(i / scales_per_decade) up to r_max,
/// checked against a normalised cloud.
inline std::vector<double> scale_grid(const PointCloud& normalized, const EstimatorConfig& cfg) {
    require(cfg.scales_per_decade >= 1, "estimator config: scales_per_decade must be >= 1");
    require(!cfg.theta_grid.empty(), "estimator config: empty theta grid");
    for (double t : cfg.theta_grid) detail::check_theta(t);
    const double floor_r = 10.0 * normalized.resolution();
    const double r_min = cfg.r_min > 0.0 ? cfg.r_min : floor_r;
    const double diam = normalized.diameter();
    if (r_min < floor_r * (1.0 - 1e-12))
        throw EstimatorError("estimator config: r_min " + std::to_string(r_min) + " is below 10 x resolution " +
                             std::to_string(floor_r));
    if (!(cfg.r_max > r_min && cfg.r_max < 1.0))
        throw EstimatorError("estimator config: need r_min < r_max < 1 (r_min=" + std::to_string(r_min) +
                             ", r_max=" + std::to_string(cfg.r_max) + ")");
    for (double t : cfg.theta_grid)
        if (!(std::pow(cfg.r_max, t) < diam))
            throw EstimatorError("estimator config: r_max^theta is not below the cloud diameter at theta=" + std::to_string(t));
    std::vector<double> rs;
    const double step = 1.0 / cfg.scales_per_decade;
    for (int i = 0;; ++i) {
        const double r = r_min * std::pow(10.0, i * step);
        if (r > cfg.r_max * (1.0 + 1e-12)) break;
        rs.push_back(r);
    }
    return rs;
}

/// Candidate centres as indices into the (sorted) cloud: every point, or n
/// index-stratified points, n points nearest an even spread of first
/// coordinates (so sparse stretches of a very uneven cloud are represented
/// too), and the cloud points nearest the flagged regions.
inline std::vector<std::size_t> select_centers(const PointCloud& cloud, const CenterStrategy& s) {
    const std::size_t n = cloud.size();
    std::vector<std::size_t> idx;
    if (s.mode == CenterStrategy::Mode::all || s.n >= n) {
        idx.resize(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        return idx;
    }
    require(s.n >= 1, "select_centers: stratified count must be >= 1");
    for (std::size_t i = 0; i < s.n; ++i) idx.push_back(i * n / s.n);
    const auto& pts = cloud.points();
    const double x0 = pts.front()[0], x1 = pts.back()[0];
    for (std::size_t i = 0; i < s.n; ++i) {
        const double x = x0 + (x1 - x0) * (static_cast<double>(i) + 0.5) / static_cast<double>(s.n);
        auto it = std::lower_bound(pts.begin(), pts.end(), x, [](const Point2& p, double v) { return p[0] < v; });
        std::size_t j = static_cast<std::size_t>(it - pts.begin());
        if (j == n || (j > 0 && x - pts[j - 1][0] < pts[j][0] - x)) --j;
        idx.push_back(j);
    }
    for (const auto& f : cloud.flagged()) {
        const double tol = std::max(cloud.resolution(), f.radius);
        auto it = std::lower_bound(pts.begin(), pts.end(), f.center[0] - tol, [](const Point2& p, double v) { return p[0] < v; });
        std::size_t best = n;
        double bd = INFINITY;
        for (; it != pts.end() && (*it)[0] <= f.center[0] + tol; ++it) {
            const double d = std::hypot((*it)[0] - f.center[0], (*it)[1] - f.center[1]);
            if (d < bd) bd = d, best = static_cast<std::size_t>(it - pts.begin());
        }
        if (best < n && bd <= tol) idx.push_back(best);
    }
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    return idx;
}

enum class SetSpectrumKind { assouad, lower };

struct ScaleExtremum {
    double r = 0.0;
    std::size_t count = 0;
    Point2 center{0, 0};
    std::size_t centers_used = 0;
    std::size_t centers_excluded = 0;
};

struct SpectrumEstimate {
    double theta = 0.0;
    double value = 0.0;
    double std_error = 0.0;
    std::vector<ScaleExtremum> scales;  // usable scales only
    double scale_factor = 1.0;          // normalisation applied to the cloud
};

namespace detail {

/// Extremal two-scale counts for every theta at one scale, reduced in centre
/// order so ties go to the lexicographically smallest centre.
inline std::vector<ScaleExtremum> extrema_at_scale(const PointCloud& cloud, const std::vector<std::size_t>& centers,
                                                   double r, const std::vector<double>& thetas, SetSpectrumKind kind,
                                                   CoveringMethod method) {
    require(method == CoveringMethod::grid_boxes || cloud.dim() == 1, "estimator: exact_1d needs a one-dimensional cloud");
    const auto& pts = cloud.points();
    std::optional<BoxIndex> index;
    if (cloud.dim() == 2) index.emplace(pts, 2.0 * r);
    const std::size_t nt = thetas.size();
    constexpr std::size_t kExcluded = static_cast<std::size_t>(-1);
    std::vector<std::size_t> counts(centers.size() * nt, kExcluded);
    parallel_for(centers.size(), [&](std::size_t c) {
        const Point2& x = pts[centers[c]];
        for (std::size_t t = 0; t < nt; ++t) {
            const double R = std::pow(r, thetas[t]);
            // a flagged region no wider than r only hides points within r of
            // its (sampled) cusp, which cannot change N_r by more than a factor
            if (kind == SetSpectrumKind::lower && cloud.touches_flagged(x, R, r)) continue;
            std::size_t n;
            if (index)
                n = index->count_in_ball({x, R});
            else if (method == CoveringMethod::exact_1d)
                n = exact_cover_1d(pts, x[0] - R, x[0] + R, r);
            else
                n = grid_cover_1d(pts, x[0] - R, x[0] + R, 2.0 * r);
            counts[c * nt + t] = n;
        }
    });
    std::vector<ScaleExtremum> out(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        auto& e = out[t];
        e.r = r;
        for (std::size_t c = 0; c < centers.size(); ++c) {
            const std::size_t n = counts[c * nt + t];
            if (n == kExcluded) {
                ++e.centers_excluded;
                continue;
            }
            const bool better = e.centers_used == 0 || (kind == SetSpectrumKind::assouad ? n > e.count : n < e.count);
            if (better) e.count = n, e.center = pts[centers[c]];
            ++e.centers_used;
        }
    }
    return out;
}

inline SpectrumEstimate fit_spectrum(double theta, std::vector<ScaleExtremum> scales, double factor) {
    std::vector<ScaleExtremum> usable;
    for (auto& s : scales)
        if (s.centers_used > 0) usable.push_back(s);
    if (usable.size() < 4)
        throw EstimatorError("estimate_spectrum: only " + std::to_string(usable.size()) +
                             " usable scales at theta=" + std::to_string(theta) + "; widen the scale window");
    std::vector<double> x, y;
    for (const auto& s : usable) {
        x.push_back((1.0 - theta) * std::log(1.0 / s.r));
        y.push_back(std::log(static_cast<double>(s.count)));
    }
    const LinearFit fit = fit_line(x, y);
    return {theta, fit.slope, fit.slope_stderr, std::move(usable), factor};
}

}  // namespace detail

/// Empirical Assouad or lower spectrum at every theta of cfg.theta_grid:
/// the slope of ln M(r) against (1 - theta) ln(1/r), where M(r) is the
/// max (Assouad) or min (lower) two-scale count over the centres. The lower
/// kind skips centres whose r^theta-ball meets a flagged region wider than r.
inline std::vector<SpectrumEstimate> estimate_spectrum_profile(const PointCloud& cloud, SetSpectrumKind kind,
                                                               const EstimatorConfig& cfg) {
    const NormalizedCloud nc = normalize_cloud(cloud);
    const auto rs = scale_grid(nc.cloud, cfg);
    const auto centers = select_centers(nc.cloud, cfg.centers);
    if (kind == SetSpectrumKind::lower) {
        bool any = false;
        for (auto c : centers) any = any || !nc.cloud.touches_flagged(nc.cloud[c], 0.0);
        if (!any) throw EstimatorError("estimate_spectrum: every centre lies in a flagged region");
    }
    std::vector<std::vector<ScaleExtremum>> per_theta(cfg.theta_grid.size());
    for (double r : rs) {
        auto ext = detail::extrema_at_scale(nc.cloud, centers, r, cfg.theta_grid, kind, cfg.method);
        for (std::size_t t = 0; t < ext.size(); ++t) per_theta[t].push_back(ext[t]);
    }
    std::vector<SpectrumEstimate> out;
    for (std::size_t t = 0; t < cfg.theta_grid.size(); ++t)
        out.push_back(detail::fit_spectrum(cfg.theta_grid[t], std::move(per_theta[t]), nc.scale));
    return out;
}

inline SpectrumEstimate estimate_spectrum(const PointCloud& cloud, SetSpectrumKind kind, double theta, EstimatorConfig cfg) {
    cfg.theta_grid = {theta};
    return estimate_spectrum_profile(cloud, kind, cfg).front();
}

inline SpectrumProfile to_profile(const std::vector<SpectrumEstimate>& est, SetSpectrumKind kind) {
    SpectrumProfile p;
    p.kind = kind == SetSpectrumKind::assouad ? SpectrumKind::set_assouad : SpectrumKind::set_lower;
    p.source = ProfileSource::empirical;
    for (const auto& e : est) {
        p.theta.push_back(e.theta);
        p.values.push_back(e.value);
        p.stderrs.push_back(e.std_error);
    }
    return p;
}

struct BoxDimensionEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::vector<std::pair<double, std::size_t>> counts;  // (r, N_r)
};

/// Slope of ln N_r(cloud) against ln(1/r) over the configured window.
inline BoxDimensionEstimate estimate_box_dimension(const PointCloud& cloud, const EstimatorConfig& cfg) {
    const NormalizedCloud nc = normalize_cloud(cloud);
    BoxDimensionEstimate e;
    if (nc.cloud.size() == 1) return e;
    const auto rs = scale_grid(nc.cloud, cfg);
    if (rs.size() < 4) throw EstimatorError("estimate_box_dimension: fewer than 4 scales in the window");
    std::vector<double> x, y;
    for (double r : rs) {
        const std::size_t n = covering_number(nc.cloud, std::nullopt, r, cfg.method);
        e.counts.emplace_back(r, n);
        x.push_back(std::log(1.0 / r));
        y.push_back(std::log(static_cast<double>(n)));
    }
    const LinearFit fit = fit_line(x, y);
    e.value = fit.slope;
    e.std_error = fit.slope_stderr;
    return e;
}

// ---------------------------------------------------------------------------
// Measure spectra of a model.

/// Boundary sample used for measure sweeps: horoball bases plus a
/// logarithmic sweep, in the half-space model.
struct MeasureSweep {
    std::vector<BoundaryPoint> z;
    std::vector<double> T{40.0};
};

inline SpectrumProfile measure_spectrum_profile(const MeasureModel& M, const MeasureSweep& sweep, SpectrumKind kind,
                                                const std::vector<double>& grid) {
    require(kind == SpectrumKind::mu_assouad || kind == SpectrumKind::mu_lower,
            "measure_spectrum_profile: kind must be mu-assouad or mu-lower");
    SpectrumProfile p;
    p.kind = kind;
    p.source = ProfileSource::empirical;
    for (double t : grid) {
        p.theta.push_back(t);
        p.values.push_back(measure_spectrum_extremum(M, sweep.z, sweep.T, t, kind).value);
        p.stderrs.push_back(0.0);
    }
    return p;
}

// ---------------------------------------------------------------------------
// Slab check near a cusp at infinity.

/// origin + span(directions) in the chart; directions need not be
/// orthonormal but must be independent.
struct AffineSubspace {
    Point2 origin{0, 0};
    std::vector<Point2> directions;
};

struct SlabReport {
    double max_deviation = 0.0;
    std::size_t points_in_window = 0;
    double lambda = 0.0;
    bool pass = true;
};

inline double distance_to_subspace(const Point2& p, const AffineSubspace& V, int dim) {
    std::vector<Point2> basis;
    for (auto d : V.directions) {
        for (const auto& b : basis) {
            const double c = d[0] * b[0] + d[1] * b[1];
            d = {d[0] - c * b[0], d[1] - c * b[1]};
        }
        const double n = std::hypot(d[0], d[1]);
        require(n > 1e-12, "slab_check: subspace directions are dependent");
        basis.push_back({d[0] / n, d[1] / n});
    }
    Point2 v{p[0] - V.origin[0], dim == 2 ? p[1] - V.origin[1] : 0.0};
    for (const auto& b : basis) {
        const double c = v[0] * b[0] + v[1] * b[1];
        v = {v[0] - c * b[0], v[1] - c * b[1]};
    }
    return std::hypot(v[0], v[1]);
}

/// Largest distance to V among cloud points with |x| <= window in a
/// half-space chart where the cusp sits at infinity.
inline SlabReport slab_check(const PointCloud& cloud, const BoundaryPoint& cusp, int k, const AffineSubspace& V,
                             double window, double lambda) {
    require(cusp.model() == Model::half_space && cusp.at_infinity(), "slab_check: the cusp must be conjugated to infinity");
    require(cusp.dim() - 1 == cloud.dim(), "slab_check: chart dimension does not match the cusp");
    require(k >= 1 && k <= cloud.dim(), "slab_check: rank must lie in [1, d]");
    require(static_cast<int>(V.directions.size()) == k, "slab_check: subspace dimension must equal the rank");
    require(window > 0.0 && lambda >= 0.0, "slab_check: window must be positive and lambda non-negative");
    SlabReport rep;
    rep.lambda = lambda;
    for (const auto& p : cloud.points()) {
        if (std::hypot(p[0], p[1]) > window) continue;
        ++rep.points_in_window;
        rep.max_deviation = std::max(rep.max_deviation, distance_to_subspace(p, V, cloud.dim()));
    }
    rep.pass = rep.max_deviation <= lambda;
    return rep;
}

}  // namespace kspec
