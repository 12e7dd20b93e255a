#pragma once

// Finitely generated Kleinian groups given by generator matrices: reduced
// words, breadth-first orbit enumeration, parabolic cusp discovery and a
// standard (equivariant, pairwise disjoint) horoball family.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kspec/error.hpp"
#include "kspec/hyperbolic.hpp"

namespace kspec {

/// Freely reduced word in signed generator indices: +i is generator i
/// (1-based), -i its inverse.
class Word {
  public:
    Word() = default;
    explicit Word(std::vector<int> letters) : letters_(std::move(letters)) {
        for (std::size_t i = 0; i < letters_.size(); ++i) {
            require(letters_[i] != 0, "Word: letter 0 is not a generator");
            if (i > 0) require(letters_[i] != -letters_[i - 1], "Word: not freely reduced");
        }
    }

    const std::vector<int>& letters() const { return letters_; }
    std::size_t size() const { return letters_.size(); }
    bool empty() const { return letters_.empty(); }
    int operator[](std::size_t i) const { return letters_[i]; }

    Word inverse() const {
        std::vector<int> inv(letters_.rbegin(), letters_.rend());
        for (int& l : inv) l = -l;
        return Word(std::move(inv));
    }
    /// Concatenation followed by free reduction.
    friend Word operator*(const Word& u, const Word& v) {
        std::vector<int> out = u.letters_;
        for (int l : v.letters_) {
            if (!out.empty() && out.back() == -l)
                out.pop_back();
            else
                out.push_back(l);
        }
        return Word(std::move(out));
    }
    friend bool operator==(const Word&, const Word&) = default;

    /// Letters as a, A, b, B, ... (lower case generator, upper case inverse).
    std::string str() const {
        if (letters_.empty()) return "e";
        std::string s;
        for (int l : letters_) {
            const char base = static_cast<char>('a' + (std::abs(l) - 1));
            s += l > 0 ? base : static_cast<char>(base - 'a' + 'A');
        }
        return s;
    }

  private:
    std::vector<int> letters_;
};

/// Alphabet order used for all deterministic enumerations: 1, -1, 2, -2, ...
inline int letter_rank(int l) { return 2 * (std::abs(l) - 1) + (l < 0 ? 1 : 0); }
inline int letter_at(int rank) { return (rank % 2 == 0) ? rank / 2 + 1 : -(rank / 2 + 1); }

struct DeclaredCusp {
    BoundaryPoint point;  // half-space chart
    int rank = 1;
    std::vector<Word> words;  // commuting parabolics generating the rank
};

class GroupPresentation {
  public:
    GroupPresentation(std::string name, int dim, std::vector<MobiusIsometry> generators, std::vector<DeclaredCusp> cusps)
        : name_(std::move(name)), dim_(dim), gens_(std::move(generators)), cusps_(std::move(cusps)) {
        require(dim == 2 || dim == 3, "GroupPresentation: dimension must be 2 or 3");
        for (const auto& g : gens_) {
            require(g.dim() == dim, "GroupPresentation: generator dimension mismatch");
            require(classify_isometry(g) != IsometryType::identity, "GroupPresentation: identity generator");
            inv_.push_back(g.inverse());
        }
        for (auto& cusp : cusps_) {
            cusp.point = to_model(cusp.point, Model::half_space);
            require(cusp.point.dim() == dim, "GroupPresentation: cusp dimension mismatch");
            require(cusp.rank >= 1 && cusp.rank <= dim - 1, "GroupPresentation: cusp rank must lie in [1, dim-1]");
            require(static_cast<int>(cusp.words.size()) == cusp.rank,
                    "GroupPresentation: a rank-k cusp needs k generating parabolic words");
            std::vector<MobiusIsometry> mats;
            for (const auto& w : cusp.words) {
                for (int l : w.letters())
                    require(std::abs(l) <= static_cast<int>(gens_.size()), "GroupPresentation: cusp word uses unknown generator");
                const MobiusIsometry g = evaluate(w);
                require(classify_isometry(g) == IsometryType::parabolic, "GroupPresentation: cusp word " + w.str() + " is not parabolic");
                const BoundaryPoint moved = apply_boundary(g, cusp.point);
                require(boundary_distance(to_model(moved, Model::ball), to_model(cusp.point, Model::ball)) <= 1e-8,
                        "GroupPresentation: cusp word " + w.str() + " does not fix the declared point");
                mats.push_back(g);
            }
            for (std::size_t i = 0; i < mats.size(); ++i)
                for (std::size_t j = i + 1; j < mats.size(); ++j)
                    require((mats[i] * mats[j]).approx_equal(mats[j] * mats[i], 1e-8),
                            "GroupPresentation: rank witnesses do not commute");
        }
    }

    const std::string& name() const { return name_; }
    int dim() const { return dim_; }
    int generator_count() const { return static_cast<int>(gens_.size()); }
    const std::vector<MobiusIsometry>& generators() const { return gens_; }
    const std::vector<DeclaredCusp>& declared_cusps() const { return cusps_; }

    const MobiusIsometry& letter(int l) const { return l > 0 ? gens_[l - 1] : inv_[-l - 1]; }

    MobiusIsometry evaluate(const Word& w) const {
        MobiusIsometry g = MobiusIsometry::identity(dim_);
        for (int l : w.letters()) g = g * letter(l);
        return g;
    }

    /// Conjugate presentation h G h^-1 (same words, conjugated matrices and cusps).
    GroupPresentation conjugated(const MobiusIsometry& h) const {
        std::vector<MobiusIsometry> gens;
        for (const auto& g : gens_) gens.push_back(h * g * h.inverse());
        std::vector<DeclaredCusp> cusps = cusps_;
        for (auto& c : cusps) c.point = apply_boundary(h, c.point);
        return {name_ + "^h", dim_, std::move(gens), std::move(cusps)};
    }

  private:
    std::string name_;
    int dim_;
    std::vector<MobiusIsometry> gens_;
    std::vector<DeclaredCusp> cusps_;
    std::vector<MobiusIsometry> inv_;
};

// ---------------------------------------------------------------------------
// Preset gallery.

namespace presets {

/// <z -> z + 1>: elementary, one rank-1 cusp at infinity.
inline GroupPresentation cyclic_parabolic() {
    return {"cyclic-parabolic", 2, {MobiusIsometry(1, 1, 0, 1)}, {{BoundaryPoint::infinity(2), 1, {Word({1})}}}};
}

/// The trivial group (no generators).
inline GroupPresentation identity_group(int dim = 2) { return {"identity", dim, {}, {}}; }

/// Free Fuchsian group <z -> z + lambda, z -> z/(c z + 1)>, rank-1 cusps at
/// infinity and 0. Discrete and free for lambda * c >= 4.
inline GroupPresentation two_parabolic(double lambda = 4.0, double c = 4.0) {
    require(lambda > 0.0 && c > 0.0, "two-parabolic: lambda and c must be positive");
    require(lambda * c >= 4.0, "two-parabolic: discreteness needs lambda * c >= 4");
    std::ostringstream name;
    name << "two-parabolic(" << lambda << "," << c << ")";
    return {name.str(),
            2,
            {MobiusIsometry(1, lambda, 0, 1), MobiusIsometry(1, 0, c, 1)},
            {{BoundaryPoint::infinity(2), 1, {Word({1})}}, {BoundaryPoint::on_line(0.0), 1, {Word({2})}}}};
}

/// Schottky pair of hyperbolic translations of length ell along the
/// orthogonal geodesics |z| = 1 and Re z = 0. Free and discrete for ell >= 2.
inline GroupPresentation schottky(double ell = 10.0) {
    require(ell >= 2.0, "schottky: translation length must be >= 2 for disjoint ping-pong regions");
    const double ch = std::cosh(0.5 * ell), sh = std::sinh(0.5 * ell);
    const double e = std::exp(0.5 * ell);
    return {"schottky(" + std::to_string(ell) + ")", 2, {MobiusIsometry(ch, sh, sh, ch), MobiusIsometry(e, 0, 0, 1.0 / e)}, {}};
}

}  // namespace presets

// ---------------------------------------------------------------------------
// Word enumeration.

/// Number of reduced words of length <= max_len over m free generators,
/// saturating at SIZE_MAX.
inline std::size_t reduced_word_count(int generators, int max_len) {
    if (generators == 0 || max_len == 0) return 1;
    const double total = [&] {
        double t = 1.0, level = 2.0 * generators;
        for (int l = 1; l <= max_len; ++l) {
            t += level;
            level *= 2.0 * generators - 1.0;
        }
        return t;
    }();
    if (total >= static_cast<double>(std::numeric_limits<std::size_t>::max())) return std::numeric_limits<std::size_t>::max();
    return static_cast<std::size_t>(total);
}

inline constexpr std::size_t kDefaultWordCap = 20'000'000;

inline void check_word_cap(const GroupPresentation& G, int max_len, std::size_t cap) {
    require(max_len >= 0, "max_len must be non-negative");
    const std::size_t n = reduced_word_count(G.generator_count(), max_len);
    if (n > cap)
        throw EstimatorError("enumeration of " + std::to_string(n) + " words exceeds the cap of " + std::to_string(cap));
}

/// Depth-first, lexicographic visit of every reduced word of length <=
/// max_len together with its matrix (letters appended on the right). The
/// visitor returns false to prune the subtree below a word.
template <typename Visit>
void for_each_word(const GroupPresentation& G, int max_len, Visit&& visit) {
    std::vector<int> letters;
    std::vector<MobiusIsometry> mats{MobiusIsometry::identity(G.dim())};
    std::vector<int> next_rank{0};
    const int alphabet = 2 * G.generator_count();
    if (!visit(Word(), mats.back())) return;
    while (!next_rank.empty()) {
        int& r = next_rank.back();
        if (static_cast<int>(letters.size()) >= max_len || r >= alphabet) {
            next_rank.pop_back();
            mats.pop_back();
            if (!letters.empty()) letters.pop_back();
            continue;
        }
        const int l = letter_at(r++);
        if (!letters.empty() && letters.back() == -l) continue;
        letters.push_back(l);
        mats.push_back(mats.back() * G.letter(l));
        if (visit(Word(letters), mats.back())) {
            next_rank.push_back(0);
        } else {
            letters.pop_back();
            mats.pop_back();
        }
    }
}

/// Orbit of a base point under all reduced words of length <= max_len, in
/// breadth-first order with lexicographic order inside each length. Stored
/// as a prefix tree: entry i is first_letter[i] * (entry parent[i]).
class OrbitSample {
  public:
    const ModelPoint& base() const { return base_; }
    std::size_t size() const { return images_.size(); }
    int max_len() const { return max_len_; }

    const ModelPoint& image(std::size_t i) const { return images_[i]; }
    double displacement(std::size_t i) const { return displacement_[i]; }
    int length(std::size_t i) const { return length_[i]; }
    Word word(std::size_t i) const {
        std::vector<int> letters;
        while (i != 0) {
            letters.push_back(first_[i]);
            i = parent_[i];
        }
        return Word(std::move(letters));
    }
    const std::vector<double>& displacements() const { return displacement_; }
    const std::vector<int>& lengths() const { return length_; }

  private:
    friend OrbitSample enumerate_orbit(const GroupPresentation&, const ModelPoint&, int, std::size_t);
    explicit OrbitSample(ModelPoint base) : base_(std::move(base)) {}

    ModelPoint base_;
    int max_len_ = 0;
    std::vector<ModelPoint> images_;
    std::vector<double> displacement_;
    std::vector<std::uint32_t> parent_;
    std::vector<std::int8_t> first_;
    std::vector<int> length_;
};

inline OrbitSample enumerate_orbit(const GroupPresentation& G, const ModelPoint& base, int max_len,
                                   std::size_t cap = kDefaultWordCap) {
    require(base.dim() == G.dim(), "enumerate_orbit: base dimension mismatch");
    require(G.generator_count() <= 64, "enumerate_orbit: at most 64 generators");
    check_word_cap(G, max_len, cap);
    OrbitSample s(base);
    s.max_len_ = max_len;
    const std::size_t total = reduced_word_count(G.generator_count(), max_len);
    s.images_.reserve(total);
    s.displacement_.reserve(total);
    s.parent_.reserve(total);
    s.first_.reserve(total);
    s.length_.reserve(total);
    s.images_.push_back(base);
    s.displacement_.push_back(0.0);
    s.parent_.push_back(0);
    s.first_.push_back(0);
    s.length_.push_back(0);
    const int alphabet = 2 * G.generator_count();
    std::size_t level_begin = 0, level_end = 1;
    for (int len = 1; len <= max_len; ++len) {
        for (int r = 0; r < alphabet; ++r) {
            const int l = letter_at(r);
            const MobiusIsometry& g = G.letter(l);
            for (std::size_t p = level_begin; p < level_end; ++p) {
                if (len > 1 && s.first_[p] == -l) continue;
                ModelPoint img = apply(g, s.images_[p]);
                s.displacement_.push_back(hyperbolic_distance(base, img));
                s.images_.push_back(std::move(img));
                s.parent_.push_back(static_cast<std::uint32_t>(p));
                s.first_.push_back(static_cast<std::int8_t>(l));
                s.length_.push_back(len);
            }
        }
        level_begin = level_end;
        level_end = s.images_.size();
    }
    return s;
}

// ---------------------------------------------------------------------------
// Cusps.

struct CuspRecord {
    BoundaryPoint point;  // half-space chart
    int rank = 1;
    int declared_index = 0;  // which declared cusp's orbit it lies in
    Word witness;            // parabolic word fixing the point
    Word orbit_word;         // point = orbit_word(declared point)
};

struct CuspSearch {
    std::vector<CuspRecord> cusps;
    std::vector<Word> ambiguous;   // trace too close to the parabolic band edge
    std::vector<Word> undeclared;  // parabolic but not conjugate to a declared cusp word
};

namespace detail {

// If w = u v u^-1 with v = (rotation of a declared word)^n, returns the
// declared index and the word x such that the fixed point is x(p_declared).
inline std::optional<std::pair<int, Word>> match_cusp_conjugacy(const GroupPresentation& G, const Word& w) {
    const auto& L = w.letters();
    std::size_t lo = 0, hi = L.size();
    while (hi - lo >= 2 && L[lo] == -L[hi - 1]) {
        ++lo;
        --hi;
    }
    const Word u(std::vector<int>(L.begin(), L.begin() + static_cast<long>(lo)));
    const std::vector<int> v(L.begin() + static_cast<long>(lo), L.begin() + static_cast<long>(hi));
    for (std::size_t ci = 0; ci < G.declared_cusps().size(); ++ci) {
        for (const Word& cw : G.declared_cusps()[ci].words) {
            for (int sign : {1, -1}) {
                const Word c = sign > 0 ? cw : cw.inverse();
                const auto& C = c.letters();
                const std::size_t k = C.size();
                if (k == 0 || v.size() % k != 0) continue;
                for (std::size_t j = 0; j < k; ++j) {
                    bool ok = true;
                    for (std::size_t i = 0; i < v.size() && ok; ++i) ok = v[i] == C[(i + j) % k];
                    if (!ok) continue;
                    // rotation by j equals x^-1 c x with x = c_1..c_j
                    const Word x(std::vector<int>(C.begin(), C.begin() + static_cast<long>(j)));
                    return std::make_pair(static_cast<int>(ci), u * x.inverse());
                }
            }
        }
    }
    return std::nullopt;
}

}  // namespace detail

/// Fixed points of all parabolic words of length <= max_len, deduplicated
/// (Euclidean distance < 1e-8 in the ball chart), ranks inherited from the
/// declared cusp whose orbit contains them. Sorted by orbit word length,
/// then lexicographically.
inline CuspSearch find_parabolic_cusps(const GroupPresentation& G, int max_len, std::size_t cap = kDefaultWordCap) {
    check_word_cap(G, max_len, cap);
    CuspSearch out;
    std::vector<BoundaryPoint> seen_ball;
    for_each_word(G, max_len, [&](const Word& w, const MobiusIsometry& g) {
        if (w.empty()) return true;
        if (classification_ambiguous(g)) {
            out.ambiguous.push_back(w);
            return true;
        }
        if (classify_isometry(g) != IsometryType::parabolic) return true;
        const auto match = detail::match_cusp_conjugacy(G, w);
        if (!match) {
            out.undeclared.push_back(w);
            return true;
        }
        const auto& [ci, x] = *match;
        const DeclaredCusp& dc = G.declared_cusps()[static_cast<std::size_t>(ci)];
        const BoundaryPoint p = apply_boundary(G.evaluate(x), dc.point);
        const BoundaryPoint pb = to_model(p, Model::ball);
        const BoundaryPoint moved = to_model(apply_boundary(g, p), Model::ball);
        if (boundary_distance(moved, pb) > 1e-8) {
            out.undeclared.push_back(w);
            return true;
        }
        for (const auto& q : seen_ball)
            if (boundary_distance(q, pb) < 1e-8) return true;
        seen_ball.push_back(pb);
        out.cusps.push_back({p, dc.rank, ci, w, x});
        return true;
    });
    std::stable_sort(out.cusps.begin(), out.cusps.end(), [](const CuspRecord& a, const CuspRecord& b) {
        if (a.orbit_word.size() != b.orbit_word.size()) return a.orbit_word.size() < b.orbit_word.size();
        return std::lexicographical_compare(a.orbit_word.letters().begin(), a.orbit_word.letters().end(),
                                            b.orbit_word.letters().begin(), b.orbit_word.letters().end(),
                                            [](int x, int y) { return letter_rank(x) < letter_rank(y); });
    });
    return out;
}

// ---------------------------------------------------------------------------
// Standard horoballs.

/// Pushes a ball-model horosphere inward by hyperbolic distance t. The
/// Euclidean diameter shrinks by about e^-t for small horoballs; commutes
/// with every isometry.
inline Horoball deepen(const Horoball& H, double t) {
    require(H.model() == Model::ball, "deepen: expected a ball-model horoball");
    const double ratio = (2.0 - H.size()) / H.size();
    return {H.base(), 2.0 / (1.0 + std::exp(t) * ratio)};
}

/// Ball-model horoballs with bases at distance D and sizes s1, s2 have
/// centres at distance sqrt((r1 - r2)^2 + (1 - r1)(1 - r2) D^2), r = s/2, so
/// they are disjoint (tangency allowed) iff D^2 (1 - r1)(1 - r2) >= s1 s2.
/// This form keeps its accuracy for tiny, nearly tangent horoballs.
inline bool horoballs_disjoint(const Horoball& a, const Horoball& b) {
    require(a.model() == Model::ball && b.model() == Model::ball, "horoballs_disjoint: expected ball-model horoballs");
    const double D2 = detail::dist2(a.base().coords(), b.base().coords(), a.dim());
    return D2 * (1.0 - a.radius()) * (1.0 - b.radius()) >= a.size() * b.size();
}

/// Excludes the ball origin (closed horoball).
inline bool horoball_origin_free(const Horoball& H) { return H.size() < 1.0; }

struct StandardHoroballs {
    std::vector<Horoball> horoballs;  // ball model, one per cusp record
    std::vector<int> ranks;
    double depth_shift = 0.0;  // hyperbolic shrink applied to the whole family
    double scale_factor = 1.0;  // exp(-depth_shift)
};

/// One horoball per enumerated cusp: a ball-model horoball of Euclidean
/// diameter `initial_size` at each declared cusp, transported by the cusp's
/// orbit word, then the whole family deepened by the least common
/// hyperbolic amount that makes it pairwise disjoint and origin-free.
inline StandardHoroballs assign_standard_horoballs(const GroupPresentation& G, const std::vector<CuspRecord>& cusps,
                                                   double initial_size = 0.5) {
    require(initial_size > 0.0 && initial_size < 2.0, "assign_standard_horoballs: initial size must be in (0, 2)");
    StandardHoroballs out;
    for (const auto& c : cusps) {
        const auto& dc = G.declared_cusps().at(static_cast<std::size_t>(c.declared_index));
        const Horoball H0(to_model(dc.point, Model::ball), initial_size);
        out.horoballs.push_back(horoball_image(G.evaluate(c.orbit_word), H0));
        out.ranks.push_back(c.rank);
    }
    const std::size_t n = out.horoballs.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (boundary_distance(out.horoballs[i].base(), out.horoballs[j].base()) < 1e-12)
                throw ContractError("assign_standard_horoballs: coincident tangency points (duplicate cusps not merged)");

    auto valid_at = [&](double t) {
        std::vector<Horoball> hs;
        hs.reserve(n);
        for (const auto& h : out.horoballs) hs.push_back(deepen(h, t));
        for (std::size_t i = 0; i < n; ++i) {
            if (!horoball_origin_free(hs[i])) return false;
            for (std::size_t j = i + 1; j < n; ++j)
                if (!horoballs_disjoint(hs[i], hs[j])) return false;
        }
        return true;
    };
    double t = 0.0;
    if (!valid_at(0.0)) {
        double hi = 1.0;
        while (!valid_at(hi)) {
            hi *= 2.0;
            if (hi > 1e4) throw ContractError("assign_standard_horoballs: no valid scale");
        }
        double lo = 0.0;
        for (int it = 0; it < 100 && hi - lo > 1e-13; ++it) {
            const double mid = 0.5 * (lo + hi);
            (valid_at(mid) ? hi : lo) = mid;
        }
        t = hi;
    }
    for (auto& h : out.horoballs) h = deepen(h, t);
    out.depth_shift = t;
    out.scale_factor = std::exp(-t);
    return out;
}

struct ScalingRow {
    int n;
    double distance_times_n;      // |f^n(p') - p| * n
    double size_times_n_squared;  // |f^n(H)| * n^2
};

struct ScalingReport {
    std::vector<ScalingRow> rows;
    double distance_band_ratio = 0.0;  // max / min over rows
    double size_band_ratio = 0.0;
};

/// Tracks |f^n(p') - p| * n and |f^n(H)| * n^2 for n in [n_lo, n_hi] (ball
/// model), where f is parabolic fixing p and H is based at p' != p.
inline ScalingReport cusp_horoball_scaling_check(const MobiusIsometry& f, const BoundaryPoint& p, const Horoball& H, int n_lo,
                                                 int n_hi) {
    require(classify_isometry(f) == IsometryType::parabolic, "cusp_horoball_scaling_check: f must be parabolic");
    require(n_lo >= 2 && n_hi >= n_lo, "cusp_horoball_scaling_check: need 2 <= n_lo <= n_hi (asymptotic statement)");
    const BoundaryPoint pb = to_model(p, Model::ball);
    const Horoball Hb = to_model(H, Model::ball);
    require(boundary_distance(Hb.base(), pb) > 1e-12, "cusp_horoball_scaling_check: horoball must not be based at p");
    require(boundary_distance(to_model(apply_boundary(f, pb), Model::ball), pb) <= 1e-8,
            "cusp_horoball_scaling_check: f does not fix p");
    ScalingReport rep;
    MobiusIsometry fn = MobiusIsometry::identity(f.dim());
    for (int n = 1; n <= n_hi; ++n) {
        fn = fn * f;
        if (n < n_lo) continue;
        const Horoball img = horoball_image(fn, Hb);
        rep.rows.push_back({n, boundary_distance(img.base(), pb) * n, img.size() * n * static_cast<double>(n)});
    }
    auto band = [&](auto field) {
        double lo = INFINITY, hi = 0.0;
        for (const auto& r : rep.rows) {
            lo = std::min(lo, r.*field);
            hi = std::max(hi, r.*field);
        }
        return hi / lo;
    };
    rep.distance_band_ratio = band(&ScalingRow::distance_times_n);
    rep.size_band_ratio = band(&ScalingRow::size_times_n_squared);
    return rep;
}

}  // namespace kspec
