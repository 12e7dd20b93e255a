#pragma once

// Uniform-grid bucketing of planar points, used for deduplication and
// nearest-neighbour queries on 2-D clouds.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <vector>

#include "kspec/error.hpp"

namespace kspec {

using Point2 = std::array<double, 2>;

inline std::uint64_t cell_key(std::int64_t ix, std::int64_t iy) {
    return (static_cast<std::uint64_t>(ix + (std::int64_t{1} << 31)) << 32) |
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(iy + (std::int64_t{1} << 31)));
}

class CellGrid {
  public:
    CellGrid(const std::vector<Point2>& pts, double cell) : pts_(&pts), h_(cell) {
        require(cell > 0.0 && std::isfinite(cell), "CellGrid: cell size must be positive");
        if (pts.empty()) return;
        lo_ = hi_ = pts[0];
        for (const auto& p : pts)
            for (int k = 0; k < 2; ++k) {
                lo_[k] = std::min(lo_[k], p[k]);
                hi_[k] = std::max(hi_[k], p[k]);
            }
        require(std::max(hi_[0] - lo_[0], hi_[1] - lo_[1]) / h_ < 1e9, "CellGrid: cell size too small for the extent");
        for (std::size_t i = 0; i < pts.size(); ++i) cells_[key_of(pts[i])].push_back(static_cast<std::uint32_t>(i));
    }

    std::int64_t ix(double x) const { return static_cast<std::int64_t>(std::floor((x - lo_[0]) / h_)); }
    std::int64_t iy(double y) const { return static_cast<std::int64_t>(std::floor((y - lo_[1]) / h_)); }
    std::uint64_t key_of(const Point2& p) const { return cell_key(ix(p[0]), iy(p[1])); }

    /// Calls f(index) for every point in cells overlapping the square of
    /// half-width r around q.
    template <typename F>
    void for_each_near(const Point2& q, double r, F&& f) const {
        const auto x0 = ix(q[0] - r), x1 = ix(q[0] + r), y0 = iy(q[1] - r), y1 = iy(q[1] + r);
        if (static_cast<double>(x1 - x0 + 1) * static_cast<double>(y1 - y0 + 1) > static_cast<double>(cells_.size())) {
            // sparse grid: scanning every point is cheaper than every cell
            for (std::size_t i = 0; i < pts_->size(); ++i) {
                const auto& p = (*pts_)[i];
                if (std::abs(p[0] - q[0]) <= r + h_ && std::abs(p[1] - q[1]) <= r + h_) f(static_cast<std::uint32_t>(i));
            }
            return;
        }
        for (auto a = x0; a <= x1; ++a)
            for (auto b = y0; b <= y1; ++b) {
                auto it = cells_.find(cell_key(a, b));
                if (it == cells_.end()) continue;
                for (auto i : it->second) f(i);
            }
    }

    /// Distance from point i to its nearest other point (+inf if alone).
    double nearest_gap(std::size_t i) const {
        const auto& pts = *pts_;
        const Point2 q = pts[i];
        const double span = std::max({hi_[0] - lo_[0], hi_[1] - lo_[1], h_});
        double best = std::numeric_limits<double>::infinity();
        for (double r = h_;; r *= 2.0) {
            for_each_near(q, r, [&](std::uint32_t j) {
                if (j == i) return;
                best = std::min(best, std::hypot(pts[j][0] - q[0], pts[j][1] - q[1]));
            });
            if (best <= r || r > 2.0 * span) return best;
        }
    }

  private:
    const std::vector<Point2>* pts_;
    double h_;
    Point2 lo_{0, 0}, hi_{0, 0};
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells_;
};

}  // namespace kspec
