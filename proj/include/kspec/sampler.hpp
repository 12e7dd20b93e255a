#pragma once

// Finite samples of limit sets and of the inverted-lattice reference sets.
// A cloud lives in a flat chart of dimension 1 or 2 and records where it is
// known to be under-sampled.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kspec/error.hpp"
#include "kspec/kleinian.hpp"
#include "kspec/parallel.hpp"
#include "kspec/spatial.hpp"

namespace kspec {

struct FlaggedRegion {
    Point2 center{0, 0};
    double radius = 0.0;
};

class PointCloud {
  public:
    PointCloud() = default;

    /// Sorts, drops exact duplicates and validates. Points closer than
    /// resolution/10 are merged (first in sorted order wins).
    PointCloud(int dim, std::vector<Point2> points, double resolution, std::string provenance,
               std::vector<FlaggedRegion> flagged = {})
        : dim_(dim), pts_(std::move(points)), resolution_(resolution), provenance_(std::move(provenance)),
          flagged_(std::move(flagged)) {
        require(dim_ == 1 || dim_ == 2, "PointCloud: chart dimension must be 1 or 2");
        require(!pts_.empty(), "PointCloud: empty cloud");
        require(resolution_ > 0.0 && std::isfinite(resolution_), "PointCloud: resolution must be positive and finite");
        for (auto& p : pts_) {
            require(std::isfinite(p[0]) && std::isfinite(p[1]), "PointCloud: non-finite coordinate");
            if (dim_ == 1) p[1] = 0.0;
        }
        std::sort(pts_.begin(), pts_.end());
        merge_close(resolution_ / 10.0);
        std::sort(flagged_.begin(), flagged_.end(),
                  [](const FlaggedRegion& a, const FlaggedRegion& b) { return a.center < b.center; });
        for (const auto& f : flagged_) max_flag_radius_ = std::max(max_flag_radius_, f.radius);
    }

    int dim() const { return dim_; }
    std::size_t size() const { return pts_.size(); }
    const std::vector<Point2>& points() const { return pts_; }
    const Point2& operator[](std::size_t i) const { return pts_[i]; }
    double resolution() const { return resolution_; }
    const std::string& provenance() const { return provenance_; }
    const std::vector<FlaggedRegion>& flagged() const { return flagged_; }

    /// Whether the closed ball B(x, r) meets a flagged region of radius
    /// greater than min_radius.
    bool touches_flagged(const Point2& x, double r, double min_radius = -1.0) const {
        if (flagged_.empty() || max_flag_radius_ <= min_radius) return false;
        const double reach = r + max_flag_radius_;
        auto it = std::lower_bound(flagged_.begin(), flagged_.end(), x[0] - reach,
                                   [](const FlaggedRegion& f, double v) { return f.center[0] < v; });
        for (; it != flagged_.end() && it->center[0] <= x[0] + reach; ++it)
            if (it->radius > min_radius && std::hypot(it->center[0] - x[0], it->center[1] - x[1]) < r + it->radius)
                return true;
        return false;
    }

    /// Exact Euclidean diameter (convex hull in 2-D).
    double diameter() const {
        if (dim_ == 1) return pts_.back()[0] - pts_.front()[0];
        std::vector<Point2> hull;
        auto cross = [](const Point2& o, const Point2& a, const Point2& b) {
            return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
        };
        for (int pass = 0; pass < 2; ++pass) {
            const std::size_t start = hull.size();
            for (std::size_t k = 0; k < pts_.size(); ++k) {
                const auto& p = pass == 0 ? pts_[k] : pts_[pts_.size() - 1 - k];
                while (hull.size() >= start + 2 && cross(hull[hull.size() - 2], hull.back(), p) <= 0) hull.pop_back();
                hull.push_back(p);
            }
            hull.pop_back();
        }
        double best = 0.0;
        for (std::size_t i = 0; i < hull.size(); ++i)
            for (std::size_t j = i + 1; j < hull.size(); ++j)
                best = std::max(best, std::hypot(hull[i][0] - hull[j][0], hull[i][1] - hull[j][1]));
        return best;
    }

  private:
    void merge_close(double tol) {
        std::vector<Point2> kept;
        kept.reserve(pts_.size());
        if (dim_ == 1) {
            for (const auto& p : pts_)
                if (kept.empty() || p[0] - kept.back()[0] >= tol) kept.push_back(p);
        } else {
            std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells;
            const double h = tol > 0.0 ? tol : 1.0;
            auto cell = [&](double v) { return static_cast<std::int64_t>(std::floor(v / h)); };
            for (const auto& p : pts_) {
                const auto cx = cell(p[0]), cy = cell(p[1]);
                bool close = false;
                for (auto a = cx - 1; a <= cx + 1 && !close; ++a)
                    for (auto b = cy - 1; b <= cy + 1 && !close; ++b) {
                        auto it = cells.find(cell_key(a, b));
                        if (it == cells.end()) continue;
                        for (auto j : it->second)
                            if (std::hypot(kept[j][0] - p[0], kept[j][1] - p[1]) < tol || kept[j] == p) {
                                close = true;
                                break;
                            }
                    }
                if (close) continue;
                cells[cell_key(cx, cy)].push_back(static_cast<std::uint32_t>(kept.size()));
                kept.push_back(p);
            }
        }
        pts_ = std::move(kept);
    }

    int dim_ = 1;
    std::vector<Point2> pts_;
    double resolution_ = 1.0;
    std::string provenance_;
    std::vector<FlaggedRegion> flagged_;
    double max_flag_radius_ = 0.0;
};

/// Largest nearest-neighbour distance among points outside the flagged
/// regions (all points if every one is flagged), scanned with a fixed stride
/// (every point below 200000 points).
inline double nearest_gap_resolution(int dim, std::vector<Point2> pts, const std::vector<FlaggedRegion>& flagged = {}) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 2) return 1e-15;
    const PointCloud probe(dim, {pts.front()}, 1.0, "probe", flagged);
    std::vector<char> skip(pts.size(), 0);
    std::size_t skipped = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) skipped += (skip[i] = probe.touches_flagged(pts[i], 0.0));
    if (skipped == pts.size()) std::fill(skip.begin(), skip.end(), 0);
    const std::size_t stride = std::max<std::size_t>(1, pts.size() / 200000);
    double worst = 0.0;
    if (dim == 1) {
        for (std::size_t i = 0; i < pts.size(); i += stride) {
            if (skip[i]) continue;
            double g = INFINITY;
            if (i > 0) g = std::min(g, pts[i][0] - pts[i - 1][0]);
            if (i + 1 < pts.size()) g = std::min(g, pts[i + 1][0] - pts[i][0]);
            worst = std::max(worst, g);
        }
    } else {
        double ext = 0.0;
        for (int k = 0; k < 2; ++k) {
            auto [lo, hi] = std::minmax_element(pts.begin(), pts.end(), [k](auto& a, auto& b) { return a[k] < b[k]; });
            ext = std::max(ext, (*hi)[k] - (*lo)[k]);
        }
        const CellGrid grid(pts, std::max(ext / std::sqrt(static_cast<double>(pts.size())), 1e-300));
        for (std::size_t i = 0; i < pts.size(); i += stride)
            if (!skip[i]) worst = std::max(worst, grid.nearest_gap(i));
    }
    return worst > 0.0 && std::isfinite(worst) ? worst : 1e-15;
}

// ---------------------------------------------------------------------------
// Limit-set sampling.

/// angle: d = 1 only; x -> atan(x)/pi on the circle R/Z (infinity -> 1/2),
/// cut open at the middle of the largest gap between samples.
/// plane: the half-space boundary coordinates; infinity is dropped.
enum class Chart { angle, plane };

inline const char* to_string(Chart c) { return c == Chart::angle ? "angle" : "plane"; }

struct SampleOptions {
    int max_len = 8;
    /// When positive, a word is extended only while the chart spread of its
    /// seed images is at least eps (max_len still caps the length).
    double eps = 0.0;
    std::optional<Chart> chart;
    std::size_t max_points = 5'000'000;
};

namespace detail {

struct ChartPoint {
    Point2 x{0, 0};
    bool valid = true;  // false for infinity in the plane chart
};

inline ChartPoint chart_coords(const BoundaryPoint& p, Chart chart) {
    const BoundaryPoint h = to_model(p, Model::half_space);
    if (chart == Chart::angle) {
        if (h.at_infinity()) return {{0.5, 0.0}, true};
        return {{std::atan(h[0]) / std::numbers::pi, 0.0}, true};
    }
    if (h.at_infinity()) return {{0, 0}, false};
    return {{h[0], h.dim() == 3 ? h[1] : 0.0}, true};
}

inline double chart_distance(const Point2& a, const Point2& b, Chart chart) {
    if (chart == Chart::angle) {
        const double d = std::fmod(std::abs(a[0] - b[0]), 1.0);
        return std::min(d, 1.0 - d);
    }
    return std::hypot(a[0] - b[0], a[1] - b[1]);
}

/// A seed boundary point. Its image under a word w lies in the part of the
/// limit set coded by w unless w ends in one of `exclude_after`: the seed then
/// sits in the cylinder of the inverse letter, or is the fixed point of a
/// parabolic last letter (whose tail is refined by extending the word).
struct SampleSeed {
    BoundaryPoint point;
    std::vector<int> exclude_after;
    bool derived = false;  // one-letter image of a base seed
    bool excluded_after(int l) const {
        return std::find(exclude_after.begin(), exclude_after.end(), l) != exclude_after.end();
    }
};

/// Generator fixed points and declared cusps, plus their one-letter images.
inline std::vector<SampleSeed> sample_seeds(const GroupPresentation& G) {
    std::vector<SampleSeed> seeds;
    auto add = [&](const BoundaryPoint& p, std::vector<int> excl, bool derived) {
        const BoundaryPoint b = to_model(p, Model::ball);
        for (auto& s : seeds)
            if (boundary_distance(to_model(s.point, Model::ball), b) <= 1e-12) {
                for (int l : excl)
                    if (!s.excluded_after(l)) s.exclude_after.push_back(l);
                return;
            }
        seeds.push_back({to_model(p, Model::half_space), std::move(excl), derived});
    };
    const int alphabet = 2 * G.generator_count();
    for (int r = 0; r < alphabet; ++r) {
        const int l = letter_at(r);
        const MobiusIsometry& g = G.letter(l);
        switch (classify_isometry(g)) {
            case IsometryType::loxodromic: add(attracting_fixed_point(g), {-l}, false); break;
            case IsometryType::parabolic: add(parabolic_fixed_point(g), {l, -l}, false); break;
            default: break;
        }
    }
    for (const auto& c : G.declared_cusps()) add(c.point, {}, false);
    const std::size_t base = seeds.size();
    for (int r = 0; r < alphabet; ++r) {
        const int l = letter_at(r);
        for (std::size_t i = 0; i < base; ++i) {
            if (seeds[i].excluded_after(l)) continue;
            add(apply_boundary(G.letter(l), seeds[i].point), {-l}, true);
        }
    }
    return seeds;
}

}  // namespace detail

inline PointCloud sample_limit_set(const GroupPresentation& G, const SampleOptions& opt) {
    require(opt.max_len >= 0, "sample_limit_set: max_len must be non-negative");
    require(opt.eps >= 0.0 && std::isfinite(opt.eps), "sample_limit_set: eps must be non-negative");
    const Chart chart = opt.chart.value_or(G.dim() == 2 ? Chart::angle : Chart::plane);
    require(chart != Chart::angle || G.dim() == 2, "sample_limit_set: the angle chart needs a Fuchsian (dim 2) group");
    if (opt.eps == 0.0) check_word_cap(G, opt.max_len, opt.max_points);
    const auto seeds = detail::sample_seeds(G);
    require(!seeds.empty(), "sample_limit_set: group has no loxodromic or parabolic generator, limit set is empty");

    const int alphabet = 2 * G.generator_count();
    const int L = opt.max_len;

    struct Chunk {
        std::vector<Point2> pts;
        std::vector<FlaggedRegion> flags;
    };
    std::atomic<std::size_t> emitted{0};

    // Leaves ending in a parabolic letter l stop the tail w l^k short of the
    // cusp w(fix l); the ball from the cusp to the last cluster is flagged.
    std::vector<std::optional<BoundaryPoint>> parabolic_fix(static_cast<std::size_t>(alphabet));
    for (int r = 0; r < alphabet; ++r)
        if (classify_isometry(G.letter(letter_at(r))) == IsometryType::parabolic)
            parabolic_fix[r] = parabolic_fixed_point(G.letter(letter_at(r)));

    auto visit_word = [&](const MobiusIsometry& m, int last, int len, Chunk& out) -> bool {
        std::vector<Point2> local;
        for (const auto& s : seeds) {
            if ((last != 0 && s.excluded_after(last)) || (L == 0 && s.derived)) continue;
            const auto cp = detail::chart_coords(apply_boundary(m, s.point), chart);
            if (cp.valid) local.push_back(cp.x);
        }
        double spread = 0.0;
        for (std::size_t i = 0; i < local.size(); ++i)
            for (std::size_t j = i + 1; j < local.size(); ++j)
                spread = std::max(spread, detail::chart_distance(local[i], local[j], chart));
        if (emitted.fetch_add(local.size()) + local.size() > opt.max_points)
            throw EstimatorError("sample_limit_set: more than " + std::to_string(opt.max_points) +
                                 " points; raise eps or lower max_len");
        out.pts.insert(out.pts.end(), local.begin(), local.end());
        // seeds already carry one letter, so words stop at length L - 1
        const bool extend = len < L - 1 && (opt.eps == 0.0 || spread >= opt.eps);
        if (extend || local.empty()) return extend;
        if (last != 0 && parabolic_fix[letter_rank(last)]) {
            const auto cusp = detail::chart_coords(apply_boundary(m, *parabolic_fix[letter_rank(last)]), chart);
            if (cusp.valid) {
                double r = 0.0;
                for (const auto& q : local) r = std::max(r, detail::chart_distance(cusp.x, q, chart));
                out.flags.push_back({cusp.x, r});
            }
        }
        if (opt.eps > 0.0 && spread >= opt.eps) out.flags.push_back({local.front(), spread});
        return false;
    };

    std::vector<Chunk> chunks(static_cast<std::size_t>(alphabet) + 1);
    visit_word(MobiusIsometry::identity(G.dim()), 0, 0, chunks[0]);
    if (L >= 2) {
        parallel_for(static_cast<std::size_t>(alphabet), [&](std::size_t r) {
            struct Frame {
                MobiusIsometry m;
                int last, len;
            };
            Chunk& out = chunks[r + 1];
            const int first = letter_at(static_cast<int>(r));
            std::vector<Frame> stack{{G.letter(first), first, 1}};
            while (!stack.empty()) {
                Frame f = std::move(stack.back());
                stack.pop_back();
                if (!visit_word(f.m, f.last, f.len, out)) continue;
                for (int q = alphabet - 1; q >= 0; --q) {
                    const int l = letter_at(q);
                    if (l == -f.last) continue;
                    stack.push_back({f.m * G.letter(l), l, f.len + 1});
                }
            }
        });
    }

    std::vector<Point2> pts;
    std::vector<FlaggedRegion> flags;
    for (auto& c : chunks) {
        pts.insert(pts.end(), c.pts.begin(), c.pts.end());
        flags.insert(flags.end(), c.flags.begin(), c.flags.end());
    }
    require(!pts.empty(), "sample_limit_set: no finite sample points in this chart");

    std::ostringstream prov;
    prov << "limit-set " << G.name() << " max_len=" << L;
    if (opt.eps > 0.0) prov << " eps=" << opt.eps;
    prov << " chart=" << to_string(chart);

    if (chart == Chart::angle) {
        std::vector<double> u;
        for (const auto& p : pts) u.push_back(p[0]);
        std::sort(u.begin(), u.end());
        double cut = u.back() + 0.5 * (u.front() + 1.0 - u.back()), gap = u.front() + 1.0 - u.back();
        for (std::size_t i = 1; i < u.size(); ++i)
            if (u[i] - u[i - 1] > gap) {
                gap = u[i] - u[i - 1];
                cut = 0.5 * (u[i] + u[i - 1]);
            }
        if (cut >= 0.5) cut -= 1.0;
        // keep 0 inside the output interval: (cut - 1, cut] or (cut, cut + 1]
        auto wrap = [cut](double v) { return cut >= 0.0 ? (v > cut ? v - 1.0 : v) : (v <= cut ? v + 1.0 : v); };
        for (auto& p : pts) p[0] = wrap(p[0]);
        for (auto& f : flags) f.center[0] = wrap(f.center[0]);
        prov << " cut=" << cut;
    }

    // one flag per tail centre, the widest
    std::sort(flags.begin(), flags.end(), [](const FlaggedRegion& a, const FlaggedRegion& b) {
        return a.center != b.center ? a.center < b.center : a.radius > b.radius;
    });
    std::vector<FlaggedRegion> merged;
    for (const auto& f : flags) {
        if (f.radius <= 0.0) continue;
        if (!merged.empty() && std::hypot(merged.back().center[0] - f.center[0], merged.back().center[1] - f.center[1]) <= 1e-12) {
            merged.back().radius = std::max(merged.back().radius, f.radius);
            continue;
        }
        merged.push_back(f);
    }

    const int cdim = G.dim() - 1;
    double res = nearest_gap_resolution(cdim, pts, merged);
    PointCloud first(cdim, std::move(pts), res, prov.str(), merged);
    res = nearest_gap_resolution(cdim, first.points(), merged);
    return PointCloud(cdim, first.points(), res, prov.str(), merged);
}

inline PointCloud sample_limit_set(const GroupPresentation& G, int max_len) {
    SampleOptions opt;
    opt.max_len = max_len;
    return sample_limit_set(G, opt);
}

// ---------------------------------------------------------------------------
// Synthetic reference sets.

/// {m/|m|^2 : m in Z^k, 1 <= |m|_inf <= N} together with 0.
inline PointCloud synth_inverted_lattice(int k, int N) {
    require(k == 1 || k == 2, "synth_inverted_lattice: k must be 1 or 2");
    require(N >= 1, "synth_inverted_lattice: N must be >= 1");
    std::vector<Point2> pts{{0.0, 0.0}};
    double res = INFINITY;
    if (k == 1) {
        for (int m = 1; m <= N; ++m) {
            pts.push_back({1.0 / m, 0.0});
            pts.push_back({-1.0 / m, 0.0});
        }
        res = 1.0 / (static_cast<double>(N) * (N + 1.0));
    } else {
        for (int a = -N; a <= N; ++a)
            for (int b = -N; b <= N; ++b) {
                if (a == 0 && b == 0) continue;
                const double n2 = static_cast<double>(a) * a + static_cast<double>(b) * b;
                pts.push_back({a / n2, b / n2});
            }
        // |m/|m|^2 - m'/|m'|^2| = |m - m'| / (|m| |m'|); smallest for unit
        // neighbours across the outer shell
        for (int a = -N; a <= N; ++a)
            for (int b : {N, N + 1}) {
                const double m1 = std::hypot(a, b), m2 = std::hypot(a, b - 1);
                res = std::min(res, 1.0 / (m1 * m2));
            }
    }
    std::ostringstream prov;
    prov << "inverted-lattice k=" << k << " N=" << N;
    return PointCloud(k, std::move(pts), res, prov.str(), {{{0.0, 0.0}, 1.0 / N}});
}

/// {0} together with {1/n : 1 <= n <= N}.
inline PointCloud synth_reciprocal_set(int N) {
    require(N >= 1, "synth_reciprocal_set: N must be >= 1");
    std::vector<Point2> pts{{0.0, 0.0}};
    for (int n = 1; n <= N; ++n) pts.push_back({1.0 / n, 0.0});
    return PointCloud(1, std::move(pts), 1.0 / (static_cast<double>(N) * (N + 1.0)), "reciprocal N=" + std::to_string(N),
                      {{{0.0, 0.0}, 1.0 / N}});
}

/// {i/N : 0 <= i <= N}, a calibration set of dimension 1.
inline PointCloud synth_uniform_grid(int N) {
    require(N >= 1, "synth_uniform_grid: N must be >= 1");
    std::vector<Point2> pts;
    for (int i = 0; i <= N; ++i) pts.push_back({static_cast<double>(i) / N, 0.0});
    return PointCloud(1, std::move(pts), 1.0 / N, "grid N=" + std::to_string(N));
}

}  // namespace kspec
