#pragma once

// The global measure formula as an explicit model: ball measures
// exp(-T delta - rho (delta - k)) built from the escape depth rho(z, T) of the
// geodesic point z_T inside a disjoint horoball family.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "kspec/error.hpp"
#include "kspec/formulas.hpp"
#include "kspec/hyperbolic.hpp"
#include "kspec/kleinian.hpp"
#include "kspec/parallel.hpp"

namespace kspec {

struct RankedHoroball {
    Horoball ball;
    int rank = 1;
};

/// Pairwise disjoint horoballs with cusp ranks, held in the ball model and
/// ordered largest first (input order among equal sizes).
class CuspGeometry {
  public:
    explicit CuspGeometry(int dim, std::vector<RankedHoroball> balls = {}) : dim_(dim) {
        require(dim == 2 || dim == 3, "CuspGeometry: dimension must be 2 or 3");
        for (auto& b : balls) {
            require(b.ball.dim() == dim, "CuspGeometry: horoball dimension mismatch");
            require(b.rank >= 1 && b.rank <= dim - 1, "CuspGeometry: rank must lie in [1, d]");
            b.ball = to_model(b.ball, Model::ball);
        }
        std::stable_sort(balls.begin(), balls.end(),
                         [](const RankedHoroball& a, const RankedHoroball& b) { return a.ball.size() > b.ball.size(); });
        for (std::size_t i = 0; i < balls.size(); ++i)
            for (std::size_t j = i + 1; j < balls.size(); ++j)
                require(horoballs_disjoint(balls[i].ball, balls[j].ball),
                        "CuspGeometry: horoballs " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
        balls_ = std::move(balls);
        for (const auto& b : balls_) entry_.push_back(horoball_entry_time(b.ball));
    }

    /// Standard horoballs of an enumerated group, one per cusp record.
    static CuspGeometry from_standard(int dim, const StandardHoroballs& std_balls) {
        std::vector<RankedHoroball> out;
        for (std::size_t i = 0; i < std_balls.horoballs.size(); ++i) out.push_back({std_balls.horoballs[i], std_balls.ranks[i]});
        return CuspGeometry(dim, std::move(out));
    }

    int dim() const { return dim_; }
    int boundary_dim() const { return dim_ - 1; }
    std::size_t size() const { return balls_.size(); }
    bool empty() const { return balls_.empty(); }
    const RankedHoroball& operator[](std::size_t i) const { return balls_[i]; }
    const std::vector<RankedHoroball>& horoballs() const { return balls_; }
    /// Hyperbolic distance from the origin to horoball i.
    double entry_time(std::size_t i) const { return entry_[i]; }

    int k_min() const {
        int k = 0;
        for (const auto& b : balls_) k = (k == 0) ? b.rank : std::min(k, b.rank);
        return k;
    }
    int k_max() const {
        int k = 0;
        for (const auto& b : balls_) k = std::max(k, b.rank);
        return k;
    }

  private:
    int dim_;
    std::vector<RankedHoroball> balls_;
    std::vector<double> entry_;
};

class MeasureModel {
  public:
    MeasureModel(double delta, CuspGeometry geometry) : delta_(delta), geo_(std::move(geometry)) {
        require(std::isfinite(delta) && delta > 0.0, "MeasureModel: delta must be positive");
        require(delta > 0.5 * geo_.k_max(), "MeasureModel: delta must exceed k_max/2");
        require(delta <= geo_.boundary_dim(), "MeasureModel: delta must not exceed d");
    }
    double delta() const { return delta_; }
    const CuspGeometry& geometry() const { return geo_; }
    int d() const { return geo_.boundary_dim(); }

  private:
    double delta_;
    CuspGeometry geo_;
};

struct Escape {
    double rho = 0.0;
    int k = 0;
    long index = -1;   // horoball containing z_T, or -1
    bool tie = false;  // a second horoball also contains z_T within 1e-12
};

namespace detail {

/// Busemann coordinate of z_T relative to the ball-model boundary point b:
/// ln((1 - |z_T|^2) / |z_T - b|^2), evaluated without forming z_T, so it
/// stays accurate for T far beyond the range where tanh(T/2) rounds to 1.
inline double busemann_at(double T, double zb_dist2) {
    const double e = std::exp(-T);
    const double t = (1.0 - e) / (1.0 + e);
    const double log_one_minus_t2 = std::log(4.0) - T - 2.0 * std::log1p(e);
    // ln((1 - t)^2 + t |z - b|^2), kept in log space since (1 - t)^2 underflows
    const double a = 2.0 * (std::log(2.0) - T - std::log1p(e));
    if (!(zb_dist2 > 0.0) || !(t > 0.0)) return log_one_minus_t2 - a;
    const double b = std::log(t) + std::log(zb_dist2);
    const double hi = std::max(a, b);
    return log_one_minus_t2 - (hi + std::log1p(std::exp(std::min(a, b) - hi)));
}

}  // namespace detail

/// Depth of z_T inside the horoball H (ball model): positive inside,
/// negative outside.
inline double horoball_depth(const Horoball& H, const BoundaryPoint& z, double T) {
    require(H.model() == Model::ball && z.model() == Model::ball, "horoball_depth: expected ball-model inputs");
    const double dz = detail::dist2(z.coords(), H.base().coords(), H.dim());
    return detail::busemann_at(T, dz) - horoball_entry_time(H);
}

inline Escape escape_function(const CuspGeometry& G, const BoundaryPoint& z, double T) {
    require(T >= 0.0 && std::isfinite(T), "escape_function: T must be finite and non-negative");
    require(z.dim() == G.dim(), "escape_function: dimension mismatch");
    const BoundaryPoint zb = to_model(z, Model::ball);
    Escape e;
    for (std::size_t i = 0; i < G.size(); ++i) {
        // z_T is at distance T from the origin, so it cannot be deeper than T - S
        if (T < G.entry_time(i) - 1e-12) continue;
        const double dz = detail::dist2(zb.coords(), G[i].ball.base().coords(), G.dim());
        const double depth = detail::busemann_at(T, dz) - G.entry_time(i);
        if (depth < -1e-12) continue;
        if (e.index >= 0) {
            e.tie = true;
            break;
        }
        e.rho = std::max(0.0, depth);
        e.k = G[i].rank;
        e.index = static_cast<long>(i);
    }
    return e;
}

inline Escape escape_function(const MeasureModel& M, const BoundaryPoint& z, double T) {
    return escape_function(M.geometry(), z, T);
}

/// ln of exp(-T delta) exp(-rho (delta - k)).
inline double log_model_ball_measure(const MeasureModel& M, const BoundaryPoint& z, double T) {
    const Escape e = escape_function(M, z, T);
    return -T * M.delta() - e.rho * (M.delta() - e.k);
}

inline double model_ball_measure(const MeasureModel& M, const BoundaryPoint& z, double T) {
    return std::exp(log_model_ball_measure(M, z, T));
}

/// lambda^(2 delta - k) |H|^delta for the horoball H shrunk by lambda about
/// its base.
inline double squeezed_shadow_measure(const MeasureModel& M, const Horoball& H, int k, double lambda) {
    require(lambda > 0.0 && lambda <= 1.0, "squeezed_shadow_measure: lambda must lie in (0, 1]");
    require(k >= 1, "squeezed_shadow_measure: rank must be >= 1");
    const double size = to_model(H, Model::ball).size();
    return std::pow(lambda, 2.0 * M.delta() - k) * std::pow(size, M.delta());
}

struct HoroballCountReport {
    double sum = 0.0;          // sum of |H_p|^delta over the window
    double denominator = 0.0;  // (T - t) * model measure of B(z, e^-t)
    double ratio = 0.0;
    std::size_t count = 0;
    bool empty = true;
};

/// Horoballs based in B(z, e^-t) with e^-t > |H_p| >= e^-T, weighed against
/// (T - t) times the model measure of B(z, e^-t).
inline HoroballCountReport horoball_count_diagnostic(const MeasureModel& M, const BoundaryPoint& z, double t, double T) {
    require(t > 0.0 && T > t, "horoball_count_diagnostic: need T > t > 0");
    const BoundaryPoint zb = to_model(z, Model::ball);
    const double r = std::exp(-t), lo = std::exp(-T);
    HoroballCountReport rep;
    for (const auto& h : M.geometry().horoballs()) {
        const double s = h.ball.size();
        if (!(s < r && s >= lo)) continue;
        if (std::sqrt(detail::dist2(zb.coords(), h.ball.base().coords(), zb.dim())) > r) continue;
        rep.sum += std::pow(s, M.delta());
        ++rep.count;
    }
    rep.empty = rep.count == 0;
    rep.denominator = (T - t) * model_ball_measure(M, zb, t);
    rep.ratio = rep.empty ? 0.0 : rep.sum / rep.denominator;
    return rep;
}

/// ln(mu(B(z, e^{-T theta})) / mu(B(z, e^{-T}))) / (T (1 - theta)).
inline double measure_spectrum_ratio(const MeasureModel& M, const BoundaryPoint& z, double T, double theta) {
    require(T > 0.0, "measure_spectrum_ratio: T must be positive");
    require(theta > 0.0 && theta < 1.0, "measure_spectrum_ratio: theta must lie in (0, 1)");
    return (log_model_ball_measure(M, z, T * theta) - log_model_ball_measure(M, z, T)) / (T * (1.0 - theta));
}

struct SweepExtremum {
    double value = 0.0;
    std::size_t z_index = 0;
    double T = 0.0;
};

/// Supremum (Assouad kinds) or infimum (lower kinds) of the per-point ratio
/// over every z and T; ties keep the first in (z, T) order.
inline SweepExtremum measure_spectrum_extremum(const MeasureModel& M, const std::vector<BoundaryPoint>& zs,
                                               const std::vector<double>& Ts, double theta, SpectrumKind kind) {
    require(!zs.empty() && !Ts.empty(), "measure_spectrum_extremum: empty sweep");
    const bool sup = is_assouad(kind);
    std::vector<SweepExtremum> per_z(zs.size());
    parallel_for(zs.size(), [&](std::size_t i) {
        SweepExtremum b{measure_spectrum_ratio(M, zs[i], Ts[0], theta), i, Ts[0]};
        for (std::size_t j = 1; j < Ts.size(); ++j) {
            const double v = measure_spectrum_ratio(M, zs[i], Ts[j], theta);
            if (sup ? v > b.value : v < b.value) b = {v, i, Ts[j]};
        }
        per_z[i] = b;
    });
    SweepExtremum best = per_z[0];
    for (const auto& b : per_z)
        if (sup ? b.value > best.value : b.value < best.value) best = b;
    return best;
}

// ---------------------------------------------------------------------------
// Synthetic cusp geometries.

/// A parent cusp at infinity of the half-space (bounding plane at height
/// `parent_height`) with children tangent at x = e^u e_1, u = u_lo, u_lo +
/// u_step, ..., of Euclidean diameter `child_fill` * parent_height; plus the
/// image of the whole family under z -> -1/z with the two ranks swapped.
/// Everything is returned in the ball model.
struct SyntheticGeometrySpec {
    int dim = 3;
    int parent_rank = 1;
    int child_rank = 1;
    double parent_height = 1.1;
    double child_fill = 0.9;
    double u_lo = 1.0, u_hi = 20.0, u_step = 0.5;
};

inline CuspGeometry synthetic_cusp_geometry(const SyntheticGeometrySpec& s) {
    require(s.dim == 2 || s.dim == 3, "synthetic geometry: dimension must be 2 or 3");
    require(s.parent_height > 1.0, "synthetic geometry: the parent must not contain the base point i");
    require(s.child_fill > 0.0 && s.child_fill < 1.0, "synthetic geometry: child_fill must lie in (0, 1)");
    require(s.u_step > 0.0 && s.u_hi >= s.u_lo, "synthetic geometry: bad child range");
    std::vector<RankedHoroball> family;
    family.push_back({Horoball(BoundaryPoint::infinity(s.dim), s.parent_height), s.parent_rank});
    const double D = s.child_fill * s.parent_height;
    for (int j = 0; s.u_lo + j * s.u_step <= s.u_hi + 1e-12; ++j) {
        const double x = std::exp(s.u_lo + j * s.u_step);
        const BoundaryPoint base = BoundaryPoint::from_complex(s.dim, {x, 0.0});
        family.push_back({Horoball(base, D), s.child_rank});
    }
    const MobiusIsometry flip(s.dim, 0.0, -1.0, 1.0, 0.0);
    std::vector<RankedHoroball> all;
    for (const auto& h : family) all.push_back({to_model(h.ball, Model::ball), h.rank});
    for (const auto& h : family) {
        const int swapped = h.rank == s.parent_rank ? s.child_rank : s.parent_rank;
        all.push_back({to_model(horoball_image(flip, h.ball), Model::ball), swapped});
    }
    return CuspGeometry(s.dim, std::move(all));
}

/// Boundary points for sweeps: the horoball bases of G together with the
/// half-space points +-e^u e_1, u in [u_lo, u_hi] at step u_step, in the
/// ball model.
inline std::vector<BoundaryPoint> sweep_boundary_points(const CuspGeometry& G, double u_lo, double u_hi, double u_step) {
    require(u_step > 0.0 && u_hi >= u_lo, "sweep_boundary_points: bad range");
    std::vector<BoundaryPoint> zs;
    for (const auto& h : G.horoballs()) zs.push_back(h.ball.base());
    for (int j = 0; u_lo + j * u_step <= u_hi + 1e-12; ++j)
        for (double sign : {1.0, -1.0})
            zs.push_back(to_model(BoundaryPoint::from_complex(G.dim(), {sign * std::exp(u_lo + j * u_step), 0.0}), Model::ball));
    return zs;
}

}  // namespace kspec
