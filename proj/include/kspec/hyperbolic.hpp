#pragma once

// Models of the hyperbolic plane and 3-space (Poincare ball and upper
// half-space), Mobius isometries as unit-determinant 2x2 matrices, horoballs
// and their shadows.
//
// Coordinate conventions:
//   half-space, dim 2:  (x, y), y > 0; boundary R x {0} plus infinity
//   half-space, dim 3:  (x0, x1, t), t > 0; boundary C x {0} plus infinity
//   ball:               |x| < 1 in R^dim; boundary the unit sphere
// The Cayley map sends the half-space point with coordinates (0, .., 0, 1)
// to the ball origin, the boundary point 0 to -e_last and infinity to
// +e_last (the distinguished point `cayley_pole`).

#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <string>

#include "kspec/error.hpp"

namespace kspec {

enum class Model { ball, half_space };

inline const char* to_string(Model m) { return m == Model::ball ? "ball" : "half_space"; }

using Vec3 = std::array<double, 3>;
using Complex = std::complex<double>;

namespace detail {

inline double dot(const Vec3& a, const Vec3& b, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}
inline double norm2(const Vec3& a, int n) { return dot(a, a, n); }
inline double dist2(const Vec3& a, const Vec3& b, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

// arccosh(1 + x) without the cancellation of std::acosh near 1.
inline double acosh1p(double x) { return std::log1p(x + std::sqrt(x * (x + 2.0))); }

}  // namespace detail

/// Interior point of the hyperbolic space in one of the two models.
class ModelPoint {
  public:
    ModelPoint(Model model, std::span<const double> coords) : model_(model) {
        require(coords.size() == 2 || coords.size() == 3, "ModelPoint: dimension must be 2 or 3");
        dim_ = static_cast<int>(coords.size());
        for (int i = 0; i < dim_; ++i) x_[i] = coords[i];
        validate();
    }
    ModelPoint(Model model, int dim, const Vec3& coords) : model_(model), dim_(dim), x_(coords) {
        require(dim == 2 || dim == 3, "ModelPoint: dimension must be 2 or 3");
        for (int i = dim_; i < 3; ++i) x_[i] = 0.0;
        validate();
    }

    static ModelPoint origin(int dim) { return {Model::ball, dim, Vec3{0, 0, 0}}; }
    /// The half-space point that corresponds to the ball origin.
    static ModelPoint half_space_base(int dim) {
        Vec3 v{0, 0, 0};
        v[dim - 1] = 1.0;
        return {Model::half_space, dim, v};
    }

    Model model() const { return model_; }
    int dim() const { return dim_; }
    const Vec3& coords() const { return x_; }
    double operator[](int i) const { return x_[i]; }
    double height() const { return x_[dim_ - 1]; }

  private:
    void validate() const {
        for (int i = 0; i < dim_; ++i) require(std::isfinite(x_[i]), "ModelPoint: non-finite coordinate");
        if (model_ == Model::ball)
            require(detail::norm2(x_, dim_) < 1.0, "ModelPoint: ball point must satisfy |x| < 1");
        else
            require(x_[dim_ - 1] > 0.0, "ModelPoint: half-space point must have positive height");
    }

    Model model_;
    int dim_ = 2;
    Vec3 x_{0, 0, 0};
};

/// Point of the boundary at infinity. Half-space boundary points carry the
/// ambient coordinates with last coordinate 0, or the infinity flag.
class BoundaryPoint {
  public:
    /// Ball boundary; coords has length dim and must be a unit vector
    /// (accepted within 1e-9, then renormalised).
    static BoundaryPoint on_sphere(std::span<const double> coords) {
        require(coords.size() == 2 || coords.size() == 3, "BoundaryPoint: dimension must be 2 or 3");
        Vec3 v{0, 0, 0};
        const int n = static_cast<int>(coords.size());
        for (int i = 0; i < n; ++i) v[i] = coords[i];
        return on_sphere(n, v);
    }
    static BoundaryPoint on_sphere(int dim, const Vec3& v) {
        require(dim == 2 || dim == 3, "BoundaryPoint: dimension must be 2 or 3");
        const double r = std::sqrt(detail::norm2(v, dim));
        require(std::isfinite(r) && std::abs(r - 1.0) <= 1e-9, "BoundaryPoint: ball boundary point must be a unit vector");
        BoundaryPoint p(Model::ball, dim);
        for (int i = 0; i < dim; ++i) p.x_[i] = v[i] / r;
        return p;
    }
    /// Finite half-space boundary point; `coords` are the dim-1 coordinates
    /// of R^{dim-1} (the trailing zero is implicit).
    static BoundaryPoint on_plane(int dim, std::span<const double> coords) {
        require(dim == 2 || dim == 3, "BoundaryPoint: dimension must be 2 or 3");
        require(static_cast<int>(coords.size()) == dim - 1, "BoundaryPoint: expected dim-1 plane coordinates");
        BoundaryPoint p(Model::half_space, dim);
        for (int i = 0; i < dim - 1; ++i) {
            require(std::isfinite(coords[i]), "BoundaryPoint: non-finite coordinate");
            p.x_[i] = coords[i];
        }
        return p;
    }
    static BoundaryPoint on_line(double x) { return on_plane(2, std::array<double, 1>{x}); }
    static BoundaryPoint from_complex(int dim, Complex z) {
        if (dim == 2) {
            require(std::abs(z.imag()) <= 1e-12 * std::max(1.0, std::abs(z)),
                    "BoundaryPoint: non-real point on the boundary of H^2");
            return on_line(z.real());
        }
        return on_plane(3, std::array<double, 2>{z.real(), z.imag()});
    }
    static BoundaryPoint infinity(int dim) {
        require(dim == 2 || dim == 3, "BoundaryPoint: dimension must be 2 or 3");
        BoundaryPoint p(Model::half_space, dim);
        p.inf_ = true;
        return p;
    }

    Model model() const { return model_; }
    int dim() const { return dim_; }
    bool at_infinity() const { return inf_; }
    const Vec3& coords() const { return x_; }
    double operator[](int i) const { return x_[i]; }
    /// Half-space boundary point as a complex number (dim 2: real line).
    Complex as_complex() const { return {x_[0], dim_ == 3 ? x_[1] : 0.0}; }

  private:
    BoundaryPoint(Model m, int dim) : model_(m), dim_(dim) {}

    Model model_;
    int dim_;
    bool inf_ = false;
    Vec3 x_{0, 0, 0};
};

/// Euclidean distance between two boundary points of the same model.
/// Infinity is at distance 0 from itself and +inf from everything else.
inline double boundary_distance(const BoundaryPoint& a, const BoundaryPoint& b) {
    require(a.model() == b.model() && a.dim() == b.dim(), "boundary_distance: model/dimension mismatch");
    if (a.at_infinity() || b.at_infinity())
        return (a.at_infinity() && b.at_infinity()) ? 0.0 : INFINITY;
    return std::sqrt(detail::dist2(a.coords(), b.coords(), a.dim()));
}

enum class IsometryType { identity, elliptic, parabolic, loxodromic };

inline const char* to_string(IsometryType t) {
    switch (t) {
        case IsometryType::identity: return "identity";
        case IsometryType::elliptic: return "elliptic";
        case IsometryType::parabolic: return "parabolic";
        case IsometryType::loxodromic: return "loxodromic";
    }
    return "?";
}

/// Orientation-preserving isometry as a unit-determinant matrix
/// [[a, b], [c, d]] acting on the half-space model by z -> (az + b)/(cz + d)
/// (Poincare extension in dimension 3). Real entries for dim 2, complex for
/// dim 3. The ball model action is the Cayley conjugate.
class MobiusIsometry {
  public:
    MobiusIsometry(int dim, Complex a, Complex b, Complex c, Complex d) : dim_(dim), m_{a, b, c, d} {
        require(dim == 2 || dim == 3, "MobiusIsometry: dimension must be 2 or 3");
        for (auto& e : m_) require(std::isfinite(e.real()) && std::isfinite(e.imag()), "MobiusIsometry: non-finite entry");
        if (dim == 2)
            for (auto& e : m_) require(e.imag() == 0.0, "MobiusIsometry: dim-2 isometries need real entries");
        const Complex det = a * d - b * c;
        require(std::abs(det) > 0.0, "MobiusIsometry: singular matrix");
        if (dim == 2) require(det.real() > 0.0, "MobiusIsometry: negative determinant reverses orientation");
        const Complex s = std::sqrt(det);
        for (auto& e : m_) e /= s;
        if (dim == 2)
            for (auto& e : m_) e = e.real();
    }
    MobiusIsometry(double a, double b, double c, double d) : MobiusIsometry(2, a, b, c, d) {}

    static MobiusIsometry identity(int dim) { return {dim, 1.0, 0.0, 0.0, 1.0}; }
    /// z -> z + t on the boundary of the half-space.
    static MobiusIsometry translation(int dim, Complex t) { return {dim, 1.0, t, 0.0, 1.0}; }

    int dim() const { return dim_; }
    Complex a() const { return m_[0]; }
    Complex b() const { return m_[1]; }
    Complex c() const { return m_[2]; }
    Complex d() const { return m_[3]; }
    Complex trace() const { return m_[0] + m_[3]; }
    Complex det() const { return m_[0] * m_[3] - m_[1] * m_[2]; }

    MobiusIsometry inverse() const { return {Raw{}, dim_, {m_[3], -m_[1], -m_[2], m_[0]}}; }

    // Inverses and products of unit-determinant matrices are left as they
    // are: recomputing ad - bc for long words cancels catastrophically.
    friend MobiusIsometry operator*(const MobiusIsometry& g, const MobiusIsometry& h) {
        require(g.dim_ == h.dim_, "MobiusIsometry: dimension mismatch in composition");
        return {Raw{}, g.dim_,
                {g.m_[0] * h.m_[0] + g.m_[1] * h.m_[2], g.m_[0] * h.m_[1] + g.m_[1] * h.m_[3],
                 g.m_[2] * h.m_[0] + g.m_[3] * h.m_[2], g.m_[2] * h.m_[1] + g.m_[3] * h.m_[3]}};
    }

    /// Equality in PSL(2): entries agree up to a global sign.
    bool approx_equal(const MobiusIsometry& o, double tol = 1e-9) const {
        auto close = [&](double sign) {
            for (int i = 0; i < 4; ++i)
                if (std::abs(m_[i] - sign * o.m_[i]) > tol) return false;
            return true;
        };
        return dim_ == o.dim_ && (close(1.0) || close(-1.0));
    }

    /// Boundary action z -> (az + b)/(cz + d) on C u {inf}, in the half-space
    /// chart. The optional flag signals an infinite input / output.
    Complex act(Complex z, bool& inf) const {
        const auto [a, b, c, d] = m_;
        if (inf) {
            if (c == 0.0) return 0.0;  // stays at infinity
            inf = false;
            return a / c;
        }
        const Complex den = c * z + d;
        if (den == 0.0) {
            inf = true;
            return 0.0;
        }
        return (a * z + b) / den;
    }

    /// Raw half-space interior action on (z, t).
    void act_interior(Complex& z, double& t) const {
        const auto [a, b, c, d] = m_;
        const Complex w = c * z + d;
        const double den = std::norm(w) + std::norm(c) * t * t;
        z = ((a * z + b) * std::conj(w) + a * std::conj(c) * t * t) / den;
        t = t / den;
    }

  private:
    struct Raw {};
    MobiusIsometry(Raw, int dim, std::array<Complex, 4> m) : dim_(dim), m_(m) {
        for (auto& e : m_) require(std::isfinite(e.real()) && std::isfinite(e.imag()), "MobiusIsometry: non-finite entry");
    }

    int dim_;
    std::array<Complex, 4> m_;
};

// ---------------------------------------------------------------------------
// Cayley map between the models.

/// The ball boundary point that the Cayley map assigns to infinity (+e_last).
inline BoundaryPoint cayley_pole(int dim) {
    Vec3 v{0, 0, 0};
    v[dim - 1] = 1.0;
    return BoundaryPoint::on_sphere(dim, v);
}

/// Half-space -> ball: x -> (2x', |x|^2 - 1) / (|x|^2 + 2 x_last + 1).
inline ModelPoint cayley_map(const ModelPoint& p) {
    require(p.model() == Model::half_space, "cayley_map: expected a half-space point");
    const int n = p.dim();
    const Vec3& x = p.coords();
    const double r2 = detail::norm2(x, n);
    const double den = r2 + 2.0 * x[n - 1] + 1.0;
    Vec3 out{0, 0, 0};
    for (int i = 0; i < n - 1; ++i) out[i] = 2.0 * x[i] / den;
    out[n - 1] = (r2 - 1.0) / den;
    return {Model::ball, n, out};
}

/// Ball -> half-space, inverse of cayley_map.
inline ModelPoint inverse_cayley_map(const ModelPoint& p) {
    require(p.model() == Model::ball, "inverse_cayley_map: expected a ball point");
    const int n = p.dim();
    const Vec3& w = p.coords();
    const double r2 = detail::norm2(w, n);
    const double den = r2 - 2.0 * w[n - 1] + 1.0;
    Vec3 out{0, 0, 0};
    for (int i = 0; i < n - 1; ++i) out[i] = 2.0 * w[i] / den;
    out[n - 1] = (1.0 - r2) / den;
    return {Model::half_space, n, out};
}

inline BoundaryPoint cayley_map(const BoundaryPoint& p) {
    require(p.model() == Model::half_space, "cayley_map: expected a half-space boundary point");
    const int n = p.dim();
    if (p.at_infinity()) return cayley_pole(n);
    const double r2 = detail::norm2(p.coords(), n - 1);
    Vec3 out{0, 0, 0};
    for (int i = 0; i < n - 1; ++i) out[i] = 2.0 * p[i] / (r2 + 1.0);
    out[n - 1] = (r2 - 1.0) / (r2 + 1.0);
    return BoundaryPoint::on_sphere(n, out);
}

inline BoundaryPoint inverse_cayley_map(const BoundaryPoint& p) {
    require(p.model() == Model::ball, "inverse_cayley_map: expected a ball boundary point");
    const int n = p.dim();
    // 1 - w_last computed as |w - pole|^2 / 2 to keep precision near the pole.
    Vec3 pole{0, 0, 0};
    pole[n - 1] = 1.0;
    const double gap = 0.5 * detail::dist2(p.coords(), pole, n);
    if (gap == 0.0) return BoundaryPoint::infinity(n);
    Vec3 out{0, 0, 0};
    for (int i = 0; i < n - 1; ++i) out[i] = p[i] / gap;
    return BoundaryPoint::on_plane(n, std::span<const double>(out.data(), n - 1));
}

inline ModelPoint to_model(const ModelPoint& p, Model m) {
    if (p.model() == m) return p;
    return m == Model::ball ? cayley_map(p) : inverse_cayley_map(p);
}
inline BoundaryPoint to_model(const BoundaryPoint& p, Model m) {
    if (p.model() == m) return p;
    return m == Model::ball ? cayley_map(p) : inverse_cayley_map(p);
}

// ---------------------------------------------------------------------------
// Metric.

/// Closed-form hyperbolic distance in either model.
inline double hyperbolic_distance(const ModelPoint& p, const ModelPoint& q) {
    require(p.model() == q.model() && p.dim() == q.dim(), "hyperbolic_distance: model/dimension mismatch");
    const int n = p.dim();
    const double d2 = detail::dist2(p.coords(), q.coords(), n);
    if (d2 == 0.0) return 0.0;
    if (p.model() == Model::ball) {
        const double a = 1.0 - detail::norm2(p.coords(), n);
        const double b = 1.0 - detail::norm2(q.coords(), n);
        return detail::acosh1p(2.0 * d2 / (a * b));
    }
    return detail::acosh1p(d2 / (2.0 * p.height() * q.height()));
}

/// Endpoints (A, B) on the unit sphere of the ball-model geodesic through
/// distinct points p and q, with A on p's side.
inline std::pair<Vec3, Vec3> geodesic_endpoints(const ModelPoint& p, const ModelPoint& q) {
    require(p.model() == Model::ball && q.model() == Model::ball && p.dim() == q.dim(),
            "geodesic_endpoints: expected two ball points");
    const int n = p.dim();
    const Vec3& P = p.coords();
    const Vec3& Q = q.coords();
    const double pp = detail::norm2(P, n), qq = detail::norm2(Q, n), pq = detail::dot(P, Q, n);
    const double gram = pp * qq - pq * pq;
    Vec3 A{0, 0, 0}, B{0, 0, 0};
    if (gram <= 1e-24 * std::max(1e-300, pp * qq)) {
        // p, q and the origin are collinear: the geodesic is a diameter.
        Vec3 u{0, 0, 0};
        const double len = std::sqrt(detail::dist2(P, Q, n));
        require(len > 0.0, "geodesic_endpoints: points coincide");
        for (int i = 0; i < n; ++i) u[i] = (Q[i] - P[i]) / len;
        for (int i = 0; i < n; ++i) {
            A[i] = -u[i];
            B[i] = u[i];
        }
        return {A, B};
    }
    // Centre c of the orthogonal circle lies in span(P, Q) and satisfies
    // c.P = (1 + |P|^2)/2 and c.Q = (1 + |Q|^2)/2.
    const double rp = 0.5 * (1.0 + pp), rq = 0.5 * (1.0 + qq);
    const double alpha = (rp * qq - rq * pq) / gram;
    const double beta = (rq * pp - rp * pq) / gram;
    Vec3 c{0, 0, 0};
    for (int i = 0; i < n; ++i) c[i] = alpha * P[i] + beta * Q[i];
    const double cn = std::sqrt(detail::norm2(c, n));
    // e2: unit vector in span(P, Q) orthogonal to c.
    auto orthogonal_part = [&](const Vec3& v) {
        Vec3 o{0, 0, 0};
        const double proj = detail::dot(v, c, n) / (cn * cn);
        for (int i = 0; i < n; ++i) o[i] = v[i] - proj * c[i];
        return o;
    };
    const Vec3 op = orthogonal_part(P), oq = orthogonal_part(Q);
    Vec3 e2 = detail::norm2(op, n) >= detail::norm2(oq, n) ? op : oq;
    const double e2n = std::sqrt(detail::norm2(e2, n));
    for (int i = 0; i < n; ++i) e2[i] /= e2n;
    const double along = 1.0 / cn;
    const double across = std::sqrt(std::max(0.0, 1.0 - along * along));
    for (int i = 0; i < n; ++i) {
        A[i] = along * c[i] / cn + across * e2[i];
        B[i] = along * c[i] / cn - across * e2[i];
    }
    // chords from an endpoint grow along the arc, so A precedes P precedes Q
    if (detail::dist2(A, P, n) > detail::dist2(A, Q, n)) std::swap(A, B);
    return {A, B};
}

/// Hyperbolic distance from the cross ratio of the geodesic endpoints:
/// log(|AQ||BP| / (|AP||BQ|)). Independent of the closed form above.
inline double cross_ratio_distance(const ModelPoint& p, const ModelPoint& q) {
    require(p.model() == q.model() && p.dim() == q.dim(), "cross_ratio_distance: model/dimension mismatch");
    const ModelPoint bp = to_model(p, Model::ball), bq = to_model(q, Model::ball);
    if (detail::dist2(bp.coords(), bq.coords(), bp.dim()) == 0.0) return 0.0;
    const auto [A, B] = geodesic_endpoints(bp, bq);
    const int n = bp.dim();
    const double aq = std::sqrt(detail::dist2(A, bq.coords(), n));
    const double bpd = std::sqrt(detail::dist2(B, bp.coords(), n));
    const double ap = std::sqrt(detail::dist2(A, bp.coords(), n));
    const double bqd = std::sqrt(detail::dist2(B, bq.coords(), n));
    return std::log((aq * bpd) / (ap * bqd));
}

// ---------------------------------------------------------------------------
// Isometry actions and classification.

inline IsometryType classify_isometry(const MobiusIsometry& g, double band = 1e-9) {
    const Complex a = g.a(), b = g.b(), c = g.c(), d = g.d();
    if (std::abs(b) <= 1e-12 && std::abs(c) <= 1e-12 && std::abs(a - d) <= 1e-12) return IsometryType::identity;
    const Complex tr = g.trace();
    if (std::abs(std::abs(tr.real()) - 2.0) <= band && std::abs(tr.imag()) <= band) return IsometryType::parabolic;
    if (std::abs(tr.imag()) <= band && std::abs(tr.real()) < 2.0) return IsometryType::elliptic;
    return IsometryType::loxodromic;
}

/// True when |trace| sits just outside the parabolic band, where rounding
/// could flip the classification.
inline bool classification_ambiguous(const MobiusIsometry& g, double band = 1e-9, double outer = 1e-6) {
    const Complex tr = g.trace();
    const double gap = std::abs(std::abs(tr) - 2.0);
    return gap > band && gap <= outer;
}

inline ModelPoint apply(const MobiusIsometry& g, const ModelPoint& p) {
    require(g.dim() == p.dim(), "apply: dimension mismatch");
    const ModelPoint h = to_model(p, Model::half_space);
    const int n = h.dim();
    Complex z{h[0], n == 3 ? h[1] : 0.0};
    double t = h.height();
    g.act_interior(z, t);
    Vec3 out{z.real(), 0, 0};
    if (n == 3) out[1] = z.imag();
    out[n - 1] = t;
    return to_model(ModelPoint(Model::half_space, n, out), p.model());
}

inline BoundaryPoint apply_boundary(const MobiusIsometry& g, const BoundaryPoint& x) {
    require(g.dim() == x.dim(), "apply_boundary: dimension mismatch");
    const BoundaryPoint h = to_model(x, Model::half_space);
    bool inf = h.at_infinity();
    const Complex w = g.act(inf ? Complex{} : h.as_complex(), inf);
    const BoundaryPoint out = inf ? BoundaryPoint::infinity(x.dim()) : BoundaryPoint::from_complex(x.dim(), w);
    return to_model(out, x.model());
}

/// Fixed point of a parabolic isometry, in the half-space boundary chart.
inline BoundaryPoint parabolic_fixed_point(const MobiusIsometry& g) {
    require(classify_isometry(g) == IsometryType::parabolic, "parabolic_fixed_point: isometry is not parabolic");
    if (std::abs(g.c()) <= 1e-12 * std::max(1.0, std::abs(g.b()))) return BoundaryPoint::infinity(g.dim());
    return BoundaryPoint::from_complex(g.dim(), (g.a() - g.d()) / (2.0 * g.c()));
}

/// Attracting fixed point of a loxodromic isometry, half-space chart.
inline BoundaryPoint attracting_fixed_point(const MobiusIsometry& g) {
    require(classify_isometry(g) == IsometryType::loxodromic, "attracting_fixed_point: isometry is not loxodromic");
    const Complex a = g.a(), c = g.c(), d = g.d();
    if (std::abs(c) == 0.0) {
        // z -> (a z + b)/d; infinity attracts when |a| > |d|.
        if (std::abs(a) > std::abs(d)) return BoundaryPoint::infinity(g.dim());
        return BoundaryPoint::from_complex(g.dim(), g.b() / (d - a));
    }
    const Complex disc = std::sqrt(g.trace() * g.trace() - 4.0);
    const Complex z1 = (a - d + disc) / (2.0 * c);
    const Complex z2 = (a - d - disc) / (2.0 * c);
    // derivative at a fixed point z is 1/(cz + d)^2; attracting iff |cz + d| > 1
    const Complex z = std::abs(c * z1 + d) > std::abs(c * z2 + d) ? z1 : z2;
    return BoundaryPoint::from_complex(g.dim(), z);
}

// ---------------------------------------------------------------------------
// Geodesic rays.

/// The point z_T on the ray from the ball origin to z at distance T.
/// Throws when tanh(T/2) rounds to 1 (T beyond roughly 37).
inline ModelPoint geodesic_point(const BoundaryPoint& z, double T) {
    require(T >= 0.0, "geodesic_point: T must be non-negative");
    const BoundaryPoint zb = to_model(z, Model::ball);
    const double s = std::tanh(0.5 * T);
    require(s < 1.0, "geodesic_point: T too large to represent z_T in double precision");
    Vec3 v{0, 0, 0};
    for (int i = 0; i < zb.dim(); ++i) v[i] = s * zb[i];
    return {Model::ball, zb.dim(), v};
}

// ---------------------------------------------------------------------------
// Horoballs.

/// Horoball tangent to the boundary at `base`. `size` is the Euclidean
/// diameter (ball model or finite half-space base) or the height of the
/// bounding plane when based at infinity.
class Horoball {
  public:
    Horoball(BoundaryPoint base, double size) : base_(std::move(base)), size_(size) {
        require(std::isfinite(size) && size > 0.0, "Horoball: size must be positive");
        if (base_.model() == Model::ball) require(size < 2.0, "Horoball: ball-model diameter must be < 2");
    }

    const BoundaryPoint& base() const { return base_; }
    double size() const { return size_; }
    Model model() const { return base_.model(); }
    int dim() const { return base_.dim(); }

    /// Euclidean centre and radius (not defined at infinity).
    Vec3 center() const {
        require(!base_.at_infinity(), "Horoball: no Euclidean centre at infinity");
        Vec3 c = base_.coords();
        const int n = dim();
        if (model() == Model::ball)
            for (int i = 0; i < n; ++i) c[i] *= 1.0 - 0.5 * size_;
        else
            c[n - 1] = 0.5 * size_;
        return c;
    }
    double radius() const { return 0.5 * size_; }

    /// Point of the horosphere farthest from the base (the tip seen from the
    /// origin in the ball model; the top in the half-space model).
    ModelPoint apex() const {
        const int n = dim();
        Vec3 v{0, 0, 0};
        if (model() == Model::ball) {
            for (int i = 0; i < n; ++i) v[i] = (1.0 - size_) * base_[i];
            return {Model::ball, n, v};
        }
        if (!base_.at_infinity()) v = base_.coords();
        v[n - 1] = size_;
        return {Model::half_space, n, v};
    }

    bool contains(const ModelPoint& p, double tol = 0.0) const {
        require(p.model() == model() && p.dim() == dim(), "Horoball::contains: model/dimension mismatch");
        if (base_.at_infinity()) return p.height() >= size_ - tol;
        return std::sqrt(detail::dist2(p.coords(), center(), dim())) <= radius() + tol;
    }

  private:
    BoundaryPoint base_;
    double size_;
};

/// The horoball tangent at `base` whose horosphere passes through `witness`.
inline Horoball horoball_through(const BoundaryPoint& base, const ModelPoint& witness) {
    require(base.model() == witness.model() && base.dim() == witness.dim(), "horoball_through: model/dimension mismatch");
    const int n = base.dim();
    const Vec3& w = witness.coords();
    if (base.model() == Model::ball) {
        const double wb = detail::dot(w, base.coords(), n);
        return {base, detail::dist2(w, base.coords(), n) / (1.0 - wb)};
    }
    if (base.at_infinity()) return {base, witness.height()};
    double horiz = 0.0;
    for (int i = 0; i < n - 1; ++i) horiz += (w[i] - base[i]) * (w[i] - base[i]);
    const double h = witness.height();
    return {base, (horiz + h * h) / h};
}

/// Image g(H): maps the tangency point and the apex, then re-solves for the
/// size of the horoball tangent at the image base through the image apex.
inline Horoball horoball_image(const MobiusIsometry& g, const Horoball& H) {
    require(g.dim() == H.dim(), "horoball_image: dimension mismatch");
    return horoball_through(apply_boundary(g, H.base()), apply(g, H.apex()));
}

/// Re-expresses a horoball in the other model through its signed distance
/// S from the model base point (ball origin, half-space i), which the Cayley
/// map preserves: ball size 2/(1 + e^S), half-space diameter (1 + |x|^2) e^-S
/// or plane height e^S. Exact for horoballs too small to carry an apex.
inline Horoball to_model(const Horoball& H, Model m) {
    if (H.model() == m) return H;
    const BoundaryPoint base = to_model(H.base(), m);
    if (m == Model::half_space) {
        const double S = std::log((2.0 - H.size()) / H.size());
        if (base.at_infinity()) return {base, std::exp(S)};
        double x2 = 0.0;
        for (int i = 0; i < H.dim() - 1; ++i) x2 += base[i] * base[i];
        return {base, (1.0 + x2) * std::exp(-S)};
    }
    double S = 0.0;
    if (H.base().at_infinity()) {
        S = std::log(H.size());
    } else {
        double x2 = 0.0;
        for (int i = 0; i < H.dim() - 1; ++i) x2 += H.base()[i] * H.base()[i];
        S = std::log1p(x2) - std::log(H.size());
    }
    // 2 / (1 + e^S), arranged to avoid overflow for large |S|
    const double size = S > 0.0 ? 2.0 * std::exp(-S) / (1.0 + std::exp(-S)) : 2.0 / (1.0 + std::exp(S));
    return {base, size};
}

/// Euclidean diameter of the radial projection of a ball-model horoball to
/// the unit sphere: a spherical cap whose angular radius alpha satisfies
/// sin(alpha) = r / (1 - r) for Euclidean radius r.
inline double shadow_diameter(const Horoball& H) {
    require(H.model() == Model::ball, "shadow_diameter: expected a ball-model horoball");
    if (H.size() >= 1.0) throw ContractError("shadow_diameter: horoball contains the origin");
    const double r = H.radius();
    return 2.0 * r / (1.0 - r);
}

/// Hyperbolic distance from the ball origin to the horoball (its entry time
/// along the ray towards the base).
inline double horoball_entry_time(const Horoball& H) {
    require(H.model() == Model::ball, "horoball_entry_time: expected a ball-model horoball");
    return std::log((2.0 - H.size()) / H.size());
}

}  // namespace kspec
