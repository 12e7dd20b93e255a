#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "kspec/kleinian.hpp"

using namespace kspec;

TEST(Word, FreeReductionAndInverse) {
    EXPECT_THROW(Word({1, -1}), ContractError);
    EXPECT_THROW(Word({0}), ContractError);
    const Word w({1, 2, -1});
    EXPECT_EQ(w.str(), "abA");
    EXPECT_EQ(w.inverse(), Word({1, -2, -1}));
    EXPECT_TRUE((w * w.inverse()).empty());
    EXPECT_EQ(Word({1, 2}) * Word({-2, 1}), Word({1, 1}));
}

TEST(GroupPresentation, RejectsInvalidDeclarations) {
    EXPECT_THROW(GroupPresentation("id", 2, {MobiusIsometry::identity(2)}, {}), ContractError);
    // z -> z + 1 does not fix 0
    EXPECT_THROW(GroupPresentation("bad", 2, {MobiusIsometry(1, 1, 0, 1)}, {{BoundaryPoint::on_line(0.0), 1, {Word({1})}}}),
                 ContractError);
    // rank 2 exceeds the boundary dimension of H^2
    EXPECT_THROW(GroupPresentation("bad", 2, {MobiusIsometry(1, 1, 0, 1)},
                                   {{BoundaryPoint::infinity(2), 2, {Word({1}), Word({1})}}}),
                 ContractError);
    // a loxodromic word cannot generate a cusp
    EXPECT_THROW(GroupPresentation("bad", 2, {MobiusIsometry(2, 0, 0, 0.5)}, {{BoundaryPoint::infinity(2), 1, {Word({1})}}}),
                 ContractError);
    EXPECT_THROW(presets::two_parabolic(1.0, 1.0), ContractError);
}

TEST(GroupPresentation, RankTwoCuspNeedsCommutingWitnesses) {
    const auto t1 = MobiusIsometry::translation(3, 1.0), t2 = MobiusIsometry::translation(3, Complex{0, 1});
    const GroupPresentation G("z2", 3, {t1, t2}, {{BoundaryPoint::infinity(3), 2, {Word({1}), Word({2})}}});
    EXPECT_EQ(G.declared_cusps().front().rank, 2);
}

TEST(EnumerateOrbit, EmptyWordOnly) {
    const auto G = presets::schottky();
    const auto s = enumerate_orbit(G, ModelPoint::half_space_base(2), 0);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_TRUE(s.word(0).empty());
    EXPECT_EQ(s.displacement(0), 0.0);
}

TEST(EnumerateOrbit, FreeGroupCounts) {
    const auto G = presets::schottky(4.0);
    for (int L = 1; L <= 8; ++L) {
        const auto s = enumerate_orbit(G, ModelPoint::half_space_base(2), L);
        std::size_t expect = 1, level = 4;
        for (int l = 1; l <= L; ++l, level *= 3) expect += level;
        EXPECT_EQ(s.size(), expect);
        EXPECT_EQ(s.size(), 2 * static_cast<std::size_t>(std::pow(3, L)) - 1);
    }
}

TEST(EnumerateOrbit, CyclicCounts) {
    const auto G = presets::cyclic_parabolic();
    for (int L : {1, 5, 40}) EXPECT_EQ(enumerate_orbit(G, ModelPoint::half_space_base(2), L).size(), 2u * L + 1);
}

TEST(EnumerateOrbit, CapIsEnforced) {
    EXPECT_THROW(enumerate_orbit(presets::schottky(), ModelPoint::half_space_base(2), 30), EstimatorError);
    EXPECT_THROW(enumerate_orbit(presets::schottky(), ModelPoint::half_space_base(2), 6, 100), EstimatorError);
}

TEST(EnumerateOrbit, BreadthFirstLexicographicOrder) {
    const auto s = enumerate_orbit(presets::two_parabolic(), ModelPoint::half_space_base(2), 3);
    const std::vector<std::string> first{"e", "a", "A", "b", "B", "aa", "ab", "aB", "AA", "Ab", "AB"};
    for (std::size_t i = 0; i < first.size(); ++i) EXPECT_EQ(s.word(i).str(), first[i]);
    for (std::size_t i = 1; i < s.size(); ++i) EXPECT_LE(s.length(i - 1), s.length(i));
}

TEST(EnumerateOrbit, ImagesMatchLetterByLetterAction) {
    const auto G = presets::two_parabolic();
    const auto base = ModelPoint::half_space_base(2);
    const auto s = enumerate_orbit(G, base, 5);
    for (std::size_t i = 0; i < s.size(); i += 7) {
        ModelPoint p = base;
        const auto w = s.word(i);
        for (std::size_t k = w.size(); k-- > 0;) p = apply(G.letter(w[k]), p);
        EXPECT_LE(hyperbolic_distance(p, s.image(i)), 1e-9);
        EXPECT_GE(s.displacement(i), 0.0);
    }
}

TEST(EnumerateOrbit, DisplacementSymmetry) {
    for (const auto& G : {presets::two_parabolic(), presets::schottky(3.0)}) {
        const auto s = enumerate_orbit(G, ModelPoint::half_space_base(2), 6);
        std::map<std::vector<int>, std::size_t> index;
        for (std::size_t i = 0; i < s.size(); ++i) index[s.word(i).letters()] = i;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const auto j = index.at(s.word(i).inverse().letters());
            EXPECT_NEAR(s.displacement(i), s.displacement(j), 1e-9 * std::max(1.0, s.displacement(i)));
        }
    }
}

TEST(FindParabolicCusps, CyclicParabolic) {
    const auto r = find_parabolic_cusps(presets::cyclic_parabolic(), 6);
    ASSERT_EQ(r.cusps.size(), 1u);
    EXPECT_TRUE(r.cusps[0].point.at_infinity());
    EXPECT_EQ(r.cusps[0].rank, 1);
    EXPECT_TRUE(r.ambiguous.empty());
}

TEST(FindParabolicCusps, TwoParabolicContainsDeclaredPoints) {
    const auto G = presets::two_parabolic(4.0, 4.0);
    const auto r = find_parabolic_cusps(G, 5);
    bool inf = false, zero = false;
    for (const auto& c : r.cusps) {
        EXPECT_EQ(c.rank, 1);
        if (c.point.at_infinity()) inf = true;
        else if (std::abs(c.point[0]) < 1e-12) zero = true;
        // fixedness under the witness
        const auto g = G.evaluate(c.witness);
        EXPECT_EQ(classify_isometry(g), IsometryType::parabolic);
        const auto p = to_model(c.point, Model::ball);
        EXPECT_LE(boundary_distance(to_model(apply_boundary(g, c.point), Model::ball), p), 1e-8);
    }
    EXPECT_TRUE(inf);
    EXPECT_TRUE(zero);
    EXPECT_GT(r.cusps.size(), 2u);
    // deduplicated
    for (std::size_t i = 0; i < r.cusps.size(); ++i)
        for (std::size_t j = i + 1; j < r.cusps.size(); ++j)
            EXPECT_GE(boundary_distance(to_model(r.cusps[i].point, Model::ball), to_model(r.cusps[j].point, Model::ball)), 1e-8);
}

TEST(FindParabolicCusps, SchottkyHasNone) {
    const auto r = find_parabolic_cusps(presets::schottky(), 6);
    EXPECT_TRUE(r.cusps.empty());
    EXPECT_TRUE(r.undeclared.empty());
}

TEST(AssignStandardHoroballs, SingleCuspIsUntouched) {
    const auto G = presets::cyclic_parabolic();
    const auto cusps = find_parabolic_cusps(G, 4).cusps;
    const auto std_balls = assign_standard_horoballs(G, cusps);
    ASSERT_EQ(std_balls.horoballs.size(), 1u);
    EXPECT_EQ(std_balls.depth_shift, 0.0);
    EXPECT_DOUBLE_EQ(std_balls.horoballs[0].size(), 0.5);
}

TEST(AssignStandardHoroballs, OverlappingPairShrinksByOneFactor) {
    const auto G = presets::two_parabolic();
    const auto all = find_parabolic_cusps(G, 1).cusps;
    ASSERT_EQ(all.size(), 2u);  // infinity and 0, antipodal in the ball
    const auto out = assign_standard_horoballs(G, all, 1.5);
    EXPECT_GT(out.depth_shift, 0.0);
    ASSERT_EQ(out.horoballs.size(), 2u);
    EXPECT_NEAR(out.horoballs[0].size(), out.horoballs[1].size(), 1e-12);
    // antipodal tangent horoballs of equal size: each diameter is 1 at tangency
    EXPECT_NEAR(out.horoballs[0].size() + out.horoballs[1].size(), 2.0, 1e-9);
    EXPECT_TRUE(horoballs_disjoint(out.horoballs[0], out.horoballs[1]));
    EXPECT_FALSE(horoballs_disjoint(deepen(out.horoballs[0], -1e-6), deepen(out.horoballs[1], -1e-6)));
}

TEST(AssignStandardHoroballs, EquivariantDisjointAndOriginFree) {
    const auto G = presets::two_parabolic();
    const auto cusps = find_parabolic_cusps(G, 5).cusps;
    const auto out = assign_standard_horoballs(G, cusps);
    ASSERT_EQ(out.horoballs.size(), cusps.size());
    const std::size_t n = out.horoballs.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = out.horoballs[i];
        EXPECT_LT(a.size(), 1.0);
        // exact centre/radius check, independent of the library predicate
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto& b = out.horoballs[j];
            const auto ca = a.center(), cb = b.center();
            const double gap = std::hypot(ca[0] - cb[0], ca[1] - cb[1]) - (a.radius() + b.radius());
            EXPECT_GE(gap, -1e-12 * (a.radius() + b.radius()));
        }
        // transporting the declared-cusp horoball by the orbit word lands on this one
        const auto& c = cusps[i];
        const auto& dc = G.declared_cusps()[c.declared_index];
        const Horoball H0 = deepen(Horoball(to_model(dc.point, Model::ball), 0.5), out.depth_shift);
        const auto img = horoball_image(G.evaluate(c.orbit_word), H0);
        EXPECT_NEAR(img.size(), a.size(), 1e-9 * a.size());
    }
}

TEST(DeepenAndDisjointness, ClosedFormsAgreeWithGeometry) {
    const Horoball H(BoundaryPoint::on_sphere(2, Vec3{0, 1, 0}), 0.4);
    EXPECT_NEAR(horoball_entry_time(deepen(H, 1.5)) - horoball_entry_time(H), 1.5, 1e-12);
    // tangent pair at 90 degrees with equal radii r: sqrt(2) (1 - r) = 2r
    const double r = std::sqrt(2.0) - 1.0;
    const Horoball A(BoundaryPoint::on_sphere(2, Vec3{1, 0, 0}), 2 * r), B(BoundaryPoint::on_sphere(2, Vec3{0, 1, 0}), 2 * r);
    EXPECT_TRUE(horoballs_disjoint(deepen(A, 1e-9), deepen(B, 1e-9)));
    EXPECT_FALSE(horoballs_disjoint(deepen(A, -1e-9), deepen(B, -1e-9)));
}

TEST(CuspHoroballScaling, DiskConjugateOfUnitTranslation) {
    const MobiusIsometry f(1, 1, 0, 1);
    const Horoball H(BoundaryPoint::on_line(0.0), 0.5);
    const auto rep = cusp_horoball_scaling_check(f, BoundaryPoint::infinity(2), H, 10, 1000);
    ASSERT_EQ(rep.rows.size(), 991u);
    EXPECT_LT(rep.distance_band_ratio, 4.0);
    EXPECT_LT(rep.size_band_ratio, 16.0);
    // oracle: f^n(0) = n maps to (2n, n^2 - 1)/(n^2 + 1) in the disc; the pole is (0, 1)
    for (const auto& row : rep.rows) {
        const double n = row.n;
        const double x = 2 * n / (n * n + 1), y = (n * n - 1) / (n * n + 1);
        EXPECT_NEAR(row.distance_times_n, std::hypot(x, y - 1.0) * n, 1e-9);
    }
}

TEST(CuspHoroballScaling, RejectsFirstPowerAndNonParabolic) {
    const Horoball H(BoundaryPoint::on_line(0.0), 0.5);
    EXPECT_THROW(cusp_horoball_scaling_check(MobiusIsometry(1, 1, 0, 1), BoundaryPoint::infinity(2), H, 1, 10), ContractError);
    EXPECT_THROW(cusp_horoball_scaling_check(MobiusIsometry(2, 0, 0, 0.5), BoundaryPoint::infinity(2), H, 2, 10), ContractError);
}

TEST(FindParabolicCusps, ConjugationMovesCuspsAlong) {
    const auto G = presets::cyclic_parabolic();
    const MobiusIsometry h(0, -1, 1, 0);
    const auto r = find_parabolic_cusps(G.conjugated(h), 3);
    ASSERT_EQ(r.cusps.size(), 1u);
    EXPECT_NEAR(r.cusps[0].point[0], 0.0, 1e-12);
}
