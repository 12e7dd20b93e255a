#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "kspec/empirical.hpp"

using namespace kspec;

namespace {

// greedy left-to-right cover of sorted reals by closed intervals of length 2r
std::size_t greedy_cover(std::vector<double> xs, double r) {
    std::sort(xs.begin(), xs.end());
    std::size_t n = 0;
    double reach = -INFINITY;
    for (double x : xs)
        if (x > reach) {
            ++n;
            reach = x + 2 * r;
        }
    return n;
}

PointCloud random_cloud(std::uint64_t seed, int n) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<Point2> pts;
    for (int i = 0; i < n; ++i) pts.push_back({std::pow(u(rng), 3.0), 0});
    return PointCloud(1, std::move(pts), 1e-9, "random");
}

EstimatorConfig config_with(std::vector<double> thetas, std::size_t centres = 500) {
    EstimatorConfig cfg;
    cfg.theta_grid = std::move(thetas);
    cfg.centers.n = centres;
    return cfg;
}

}  // namespace

TEST(CoveringNumber, Examples) {
    const PointCloud four(1, {{0, 0}, {1, 0}, {0.5, 0}, {1.0 / 3, 0}}, 0.01, "four");
    EXPECT_EQ(covering_number(four, std::nullopt, 0.2, CoveringMethod::exact_1d), 3u);
    EXPECT_EQ(covering_number(synth_uniform_grid(8), std::nullopt, 0.25, CoveringMethod::exact_1d), 2u);
    const PointCloud one(1, {{0.4, 0}}, 0.01, "one");
    for (double r : {1e-9, 0.1, 5.0})
        for (auto m : {CoveringMethod::exact_1d, CoveringMethod::grid_boxes}) EXPECT_EQ(covering_number(one, std::nullopt, r, m), 1u);
    EXPECT_EQ(covering_number(four, Ball2{{5.0, 0}, 0.1}, 0.1, CoveringMethod::exact_1d), 0u);
    EXPECT_THROW(covering_number(four, std::nullopt, 0.0, CoveringMethod::exact_1d), ContractError);
    EXPECT_THROW(covering_number(synth_inverted_lattice(2, 3), std::nullopt, 0.1, CoveringMethod::exact_1d), ContractError);
}

TEST(CoveringNumber, PlanarGridBoxesMatchBruteForce) {
    const auto c = synth_inverted_lattice(2, 8);
    for (double r : {0.003, 0.02, 0.1}) {
        std::set<std::pair<long, long>> boxes;
        for (const auto& p : c.points()) boxes.insert({std::lround(std::floor(p[0] / (2 * r))), std::lround(std::floor(p[1] / (2 * r)))});
        EXPECT_EQ(covering_number(c, std::nullopt, r, CoveringMethod::grid_boxes), boxes.size());
    }
}

TEST(CoveringNumber, GridBoxesWithinFactorOfExact) {
    for (const auto& c : {synth_reciprocal_set(2000), synth_uniform_grid(5000), random_cloud(3, 3000), synth_inverted_lattice(1, 500)})
        for (double r = 1e-6; r < 0.5; r *= 1.7) {
            const auto e = covering_number(c, std::nullopt, r, CoveringMethod::exact_1d);
            const auto g = covering_number(c, std::nullopt, r, CoveringMethod::grid_boxes);
            EXPECT_GE(g, e) << c.provenance() << " r=" << r;
            EXPECT_LE(g, 2 * e + 2) << c.provenance() << " r=" << r;
            std::vector<double> xs;
            for (const auto& p : c.points()) xs.push_back(p[0]);
            EXPECT_EQ(e, greedy_cover(xs, r));
        }
}

TEST(TwoScaleCount, Examples) {
    const auto grid = synth_uniform_grid(10000);
    EXPECT_EQ(two_scale_count(grid, {0.5, 0}, 0.01, 0.5, CoveringMethod::exact_1d).count, 10u);
    EXPECT_EQ(two_scale_count(grid, {0.5, 0}, 1e-9, 0.9, CoveringMethod::exact_1d).count, 1u);
    const auto rec = synth_reciprocal_set(1000);
    for (double r : {1e-6, 1e-5, 1e-4}) {
        const double R = std::pow(r, 0.5);
        std::vector<double> tail{0.0};
        for (int n = 1; n <= 1000; ++n)
            if (1.0 / n <= R) tail.push_back(1.0 / n);
        EXPECT_EQ(two_scale_count(rec, {0, 0}, r, 0.5, CoveringMethod::exact_1d).count, greedy_cover(tail, r));
    }
    EXPECT_THROW(two_scale_count(grid, {0.50003, 0}, 0.01, 0.5, CoveringMethod::exact_1d), ContractError);
    EXPECT_THROW(two_scale_count(grid, {0.5, 0}, 0.01, 1.0, CoveringMethod::exact_1d), ContractError);
}

TEST(TwoScaleCount, NonIncreasingInScale) {
    const auto grid = synth_uniform_grid(100000);
    const auto rec = synth_reciprocal_set(100000);
    for (double theta : {0.25, 0.5, 0.75}) {
        std::size_t prev_g = SIZE_MAX, prev_r = SIZE_MAX;
        for (double r = 1e-4; r < 0.5; r *= 1.5) {
            const auto g = two_scale_count(grid, {0.5, 0}, r, theta, CoveringMethod::exact_1d).count;
            const auto q = two_scale_count(rec, {0, 0}, r, theta, CoveringMethod::exact_1d).count;
            EXPECT_LE(g, prev_g) << theta << " " << r;
            EXPECT_LE(q, prev_r) << theta << " " << r;
            prev_g = g;
            prev_r = q;
        }
    }
}

TEST(TwoScaleCount, NonDecreasingUnderRefinement) {
    const auto coarse = synth_reciprocal_set(500), fine = synth_reciprocal_set(5000);
    for (double theta : {0.25, 0.5, 0.75})
        for (double r = 1e-7; r < 0.5; r *= 2.3)
            for (auto m : {CoveringMethod::exact_1d}) {
                EXPECT_LE(two_scale_count(coarse, {0, 0}, r, theta, m).count, two_scale_count(fine, {0, 0}, r, theta, m).count);
                EXPECT_LE(two_scale_count(coarse, {0.5, 0}, r, theta, m).count, two_scale_count(fine, {0.5, 0}, r, theta, m).count);
            }
}

TEST(EstimateSpectrum, UniformGridIsOne) {
    const auto grid = synth_uniform_grid(100000);
    for (auto kind : {SetSpectrumKind::assouad, SetSpectrumKind::lower})
        for (const auto& e : estimate_spectrum_profile(grid, kind, config_with({0.25, 0.5})))
            EXPECT_NEAR(e.value, 1.0, 0.05) << e.theta;
    // at theta = 0.1 the default r_max^theta = 0.63 makes the balls overhang
    // the unit interval, so shrink the window until 2 r^theta < 1
    const auto fine = synth_uniform_grid(1000000);
    auto cfg = config_with({0.1});
    cfg.r_max = 1e-4;
    for (auto kind : {SetSpectrumKind::assouad, SetSpectrumKind::lower})
        EXPECT_NEAR(estimate_spectrum(fine, kind, 0.1, cfg).value, 1.0, 0.05);
}

TEST(EstimateSpectrum, ReciprocalSetFollowsLatticeSpectrum) {
    const auto rec = synth_reciprocal_set(100000);
    for (const auto& e : estimate_spectrum_profile(rec, SetSpectrumKind::assouad, config_with({0.25, 0.5})))
        EXPECT_NEAR(e.value, lattice_spectrum(1, e.theta), 0.1) << e.theta;
}

TEST(EstimateSpectrum, AssouadDominatesLower) {
    for (const auto& c : {synth_reciprocal_set(100000), synth_uniform_grid(100000), synth_inverted_lattice(1, 20000)}) {
        const auto cfg = config_with({0.2, 0.4});
        const auto a = estimate_spectrum_profile(c, SetSpectrumKind::assouad, cfg);
        const auto l = estimate_spectrum_profile(c, SetSpectrumKind::lower, cfg);
        // M_max >= M_min at every scale, but the fitted slopes only inherit
        // that up to box-alignment bias, which the regression stderr misses
        for (std::size_t i = 0; i < a.size(); ++i)
            EXPECT_GE(a[i].value, l[i].value - (a[i].std_error + l[i].std_error) - 0.01) << c.provenance() << " " << a[i].theta;
    }
}

TEST(EstimateSpectrum, StableUnderWindowChanges) {
    for (const auto& c : {synth_reciprocal_set(100000), synth_uniform_grid(100000)}) {
        auto cfg = config_with({0.25, 0.5});
        const auto base = estimate_spectrum_profile(c, SetSpectrumKind::assouad, cfg);
        auto halved = cfg;
        halved.r_max = cfg.r_max / 2;
        auto doubled = cfg;
        doubled.r_min = 20.0 * normalize_cloud(c).cloud.resolution();
        for (const auto& variant : {halved, doubled}) {
            const auto v = estimate_spectrum_profile(c, SetSpectrumKind::assouad, variant);
            for (std::size_t i = 0; i < v.size(); ++i)
                EXPECT_NEAR(v[i].value, base[i].value, v[i].std_error + base[i].std_error + 0.02)
                    << c.provenance() << " theta=" << v[i].theta;
        }
    }
}

TEST(EstimateSpectrum, Errors) {
    const auto grid = synth_uniform_grid(100000);
    auto cfg = config_with({0.5});
    cfg.r_max = 2e-4;  // only scales 1e-4 and 1.78e-4
    EXPECT_THROW(estimate_spectrum(grid, SetSpectrumKind::assouad, 0.5, cfg), EstimatorError);
    cfg = config_with({0.5});
    cfg.r_min = 1e-6;  // below 10 x resolution
    EXPECT_THROW(estimate_spectrum(grid, SetSpectrumKind::assouad, 0.5, cfg), EstimatorError);
    std::vector<Point2> pts;
    for (int i = 0; i <= 100000; ++i) pts.push_back({i / 100000.0, 0});
    const PointCloud covered(1, pts, 1e-5, "covered", {{{0.5, 0}, 1.0}});
    EXPECT_THROW(estimate_spectrum(covered, SetSpectrumKind::lower, 0.5, config_with({0.5})), EstimatorError);
}

TEST(EstimateBoxDimension, Examples) {
    EXPECT_NEAR(estimate_box_dimension(synth_uniform_grid(100000), {}).value, 1.0, 0.05);
    EXPECT_NEAR(estimate_box_dimension(synth_reciprocal_set(100000), {}).value, 0.5, 0.05);
    EXPECT_EQ(estimate_box_dimension(PointCloud(1, {{0.3, 0}}, 1e-3, "one"), {}).value, 0.0);
}

TEST(EstimateBoxDimension, ReciprocalCountsMatchGreedyOracle) {
    const auto rec = synth_reciprocal_set(100000);
    EstimatorConfig cfg;
    cfg.method = CoveringMethod::exact_1d;
    const auto e = estimate_box_dimension(rec, cfg);
    std::vector<double> xs;
    for (const auto& p : rec.points()) xs.push_back(p[0]);
    for (const auto& [r, n] : e.counts) EXPECT_EQ(n, greedy_cover(xs, r));
}

TEST(NormalizeCloud, ScalesToUnitDiameter) {
    const auto lat = synth_inverted_lattice(2, 5);
    const auto nc = normalize_cloud(lat);
    EXPECT_DOUBLE_EQ(nc.scale, 0.5);
    EXPECT_NEAR(nc.cloud.diameter(), 1.0, 1e-15);
    EXPECT_DOUBLE_EQ(nc.cloud.resolution(), 0.5 * lat.resolution());
    ASSERT_EQ(nc.cloud.flagged().size(), 1u);
    EXPECT_DOUBLE_EQ(nc.cloud.flagged()[0].radius, 0.1);
}

TEST(MeasureSpectrumProfile, NoCuspModelIsDelta) {
    const MeasureModel M(0.8, CuspGeometry(2));
    MeasureSweep sweep;
    for (double x : {-3.0, 0.0, 0.7, 12.0}) sweep.z.push_back(BoundaryPoint::on_line(x));
    sweep.T = {5.0, 20.0, 40.0};
    for (auto kind : {SpectrumKind::mu_assouad, SpectrumKind::mu_lower}) {
        const auto p = measure_spectrum_profile(M, sweep, kind, {0.1, 0.5, 0.9});
        for (double v : p.values) EXPECT_NEAR(v, 0.8, 1e-12);
    }
    EXPECT_THROW(measure_spectrum_profile(M, sweep, SpectrumKind::set_assouad, {0.5}), ContractError);
}

TEST(SlabCheck, CodimensionZeroAndLines) {
    const auto grid = synth_uniform_grid(100);
    const AffineSubspace axis{{0, 0}, {{1, 0}}};
    const auto r = slab_check(grid, BoundaryPoint::infinity(2), 1, axis, 10.0, 0.0);
    EXPECT_EQ(r.max_deviation, 0.0);
    EXPECT_EQ(r.points_in_window, grid.size());
    EXPECT_TRUE(r.pass);
    std::vector<Point2> pts;
    for (int i = -50; i <= 50; ++i) pts.push_back({0.1 * i, 1.0 + 0.2 * i});
    const PointCloud line(2, pts, 0.05, "line");
    const auto s = slab_check(line, BoundaryPoint::infinity(3), 1, {{0, 1}, {{1, 2}}}, 100.0, 1e-12);
    EXPECT_LT(s.max_deviation, 1e-12);
    EXPECT_TRUE(s.pass);
    EXPECT_THROW(slab_check(grid, BoundaryPoint::on_line(0.0), 1, axis, 1.0, 0.0), ContractError);
    EXPECT_THROW(slab_check(line, BoundaryPoint::infinity(3), 2, {{0, 1}, {{1, 2}}}, 1.0, 0.0), ContractError);
}

TEST(SlabCheck, CuspedPlanarCloudMatchesDirectMaximum) {
    // points scattered around the line y = x in the plane chart
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> t(-5, 5), off(-0.3, 0.3);
    std::vector<Point2> pts;
    for (int i = 0; i < 2000; ++i) {
        const double s = t(rng), o = off(rng);
        pts.push_back({s - o, s + o});
    }
    const PointCloud c(2, pts, 1e-6, "band");
    const AffineSubspace diag{{0, 0}, {{1, 1}}};
    for (double window : {1.0, 2.0, 4.0, 8.0}) {
        double worst = 0.0;
        std::size_t n = 0;
        for (const auto& p : c.points())
            if (std::hypot(p[0], p[1]) <= window) {
                ++n;
                worst = std::max(worst, std::abs(p[1] - p[0]) / std::sqrt(2.0));
            }
        const auto rep = slab_check(c, BoundaryPoint::infinity(3), 1, diag, window, 0.5);
        EXPECT_EQ(rep.points_in_window, n);
        EXPECT_NEAR(rep.max_deviation, worst, 1e-12);
        EXPECT_LE(rep.max_deviation, 0.3 * std::sqrt(2.0) + 1e-12);
        EXPECT_TRUE(rep.pass);
    }
}
