#include <gtest/gtest.h>

#include <sstream>

#include "kspec/io.hpp"

using namespace kspec;

TEST(Fmt, TwelveSignificantDigits) {
    EXPECT_EQ(io::fmt(1.0 / 3), "0.333333333333");
    EXPECT_EQ(io::fmt(0.5), "0.5");
    EXPECT_EQ(io::fmt(-0.0), "0");
    EXPECT_EQ(io::fmt(1e-10), "1e-10");
    EXPECT_EQ(io::fmt(INFINITY), "inf");
    EXPECT_EQ(io::fmt(0.1, 17), "0.10000000000000001");
}

TEST(CloudCsv, RoundTripKeepsFooter) {
    const auto c = synth_reciprocal_set(3);
    std::ostringstream out;
    io::write_cloud_csv(out, c, {{"preset", "reciprocal"}});
    const std::string text = out.str();
    EXPECT_EQ(text.rfind("# kleinian-spectra cloud v1\n0\n0.333333333333\n0.5\n1\n", 0), 0u);
    EXPECT_NE(text.find("# flagged: 0,0.333333333333"), std::string::npos);
    EXPECT_NE(text.find("# config: preset = reciprocal"), std::string::npos);
    std::istringstream in(text);
    const auto back = io::read_cloud_csv(in);
    ASSERT_EQ(back.size(), c.size());
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(back[i][0], c[i][0], 1e-12);
    EXPECT_NEAR(back.resolution(), c.resolution(), 1e-12);
    EXPECT_EQ(back.provenance(), c.provenance());
    ASSERT_EQ(back.flagged().size(), 1u);
}

TEST(CloudCsv, PlanarRoundTrip) {
    const auto c = synth_inverted_lattice(2, 2);
    std::ostringstream out;
    io::write_cloud_csv(out, c);
    std::istringstream in(out.str());
    const auto back = io::read_cloud_csv(in);
    EXPECT_EQ(back.dim(), 2);
    EXPECT_EQ(back.size(), c.size());
    std::ostringstream again;
    io::write_cloud_csv(again, back);
    EXPECT_EQ(again.str(), out.str());
}

TEST(CloudCsv, MalformedInputs) {
    const std::vector<std::string> bad{
        "",
        "x\n1\n# resolution: 0.1\n",
        "# kleinian-spectra cloud v1\n# resolution: 0.1\n",
        "# kleinian-spectra cloud v1\n0.5\n",
        "# kleinian-spectra cloud v1\n0.5\n0.1,0.2\n# resolution: 0.1\n",
        "# kleinian-spectra cloud v1\nabc\n# resolution: 0.1\n",
        "# kleinian-spectra cloud v1\n1,2,3\n# resolution: 0.1\n",
    };
    for (const auto& s : bad) {
        std::istringstream in(s);
        EXPECT_THROW(io::read_cloud_csv(in), ContractError) << s;
    }
}

TEST(ProfileCsv, RoundTripAndValidation) {
    const auto p = closed_form_profile({0.75, 1, 1}, SpectrumKind::set_assouad, {0.25, 1.0 / 3, 0.5});
    std::ostringstream out;
    io::write_profile_csv(out, p);
    EXPECT_EQ(out.str(),
              "theta,value,stderr,kind,source\n"
              "0.25,0.833333333333,0,set-assouad,closed-form\n"
              "0.333333333333,0.875,0,set-assouad,closed-form\n"
              "0.5,1,0,set-assouad,closed-form\n");
    std::istringstream in(out.str());
    const auto back = io::read_profile_csv(in);
    EXPECT_EQ(back.kind, SpectrumKind::set_assouad);
    EXPECT_EQ(back.values.size(), 3u);
    const std::vector<std::string> bad{
        "theta,value\n0.5,1\n",
        "theta,value,stderr,kind,source\n",
        "theta,value,stderr,kind,source\n0.5,1,0,set-assouad\n",
        "theta,value,stderr,kind,source\n0.5,1,0,box,closed-form\n",
        "theta,value,stderr,kind,source\n0.5,1,0,set-assouad,closed-form\n0.6,1,0,set-lower,closed-form\n",
        "theta,value,stderr,kind,source\n0.5,1,0,set-assouad,closed-form\n0.4,1,0,set-assouad,closed-form\n",
        "theta,value,stderr,kind,source\n1.5,1,0,set-assouad,closed-form\n",
        "theta,value,stderr,kind,source\n,0.5,0,set-assouad,closed-form\n",
    };
    for (const auto& s : bad) {
        std::istringstream is(s);
        EXPECT_THROW(io::read_profile_csv(is), ContractError) << s;
    }
}

TEST(Config, KeyValueLines) {
    std::istringstream in("# comment\n\ntarget = set-assouad\n delta=0.75 \ntheta = 0.1, 0.2\n");
    const auto m = io::read_config(in);
    EXPECT_EQ(m.size(), 3u);
    EXPECT_EQ(m.at("target"), "set-assouad");
    EXPECT_EQ(m.at("delta"), "0.75");
    EXPECT_EQ(m.at("theta"), "0.1, 0.2");
    std::istringstream bad("delta 0.75\n");
    EXPECT_THROW(io::read_config(bad), ContractError);
    std::istringstream empty_key(" = 3\n");
    EXPECT_THROW(io::read_config(empty_key), ContractError);
}

TEST(Geometry, RoundTripIsExact) {
    SyntheticGeometrySpec s;
    s.parent_rank = 2;
    s.u_hi = 5.0;
    const auto G = synthetic_cusp_geometry(s);
    std::ostringstream out;
    io::write_geometry(out, G);
    std::istringstream in(out.str());
    const auto back = io::read_geometry(in);
    ASSERT_EQ(back.size(), G.size());
    for (std::size_t i = 0; i < G.size(); ++i) {
        EXPECT_EQ(back[i].rank, G[i].rank);
        EXPECT_EQ(back[i].ball.size(), G[i].ball.size());
    }
}

TEST(Geometry, HalfSpaceRecords) {
    std::istringstream in("# kleinian-spectra geometry v1\ndim = 2\nmodel = half-space\ninf,2,1\n0.5,0.3,1\n");
    const auto G = io::read_geometry(in);
    ASSERT_EQ(G.size(), 2u);
    EXPECT_NEAR(G.entry_time(0), std::log(2.0), 1e-12);
    const std::vector<std::string> bad{
        "dim = 2\n",
        "# kleinian-spectra geometry v1\n0,1,0.5,1\n",
        "# kleinian-spectra geometry v1\ndim = 2\ncolour = red\n",
        "# kleinian-spectra geometry v1\ndim = 2\nmodel = ball\n0,1,0.5,1.5\n",
        "# kleinian-spectra geometry v1\ndim = 2\nmodel = ball\n0,1,0.5\n",
        "# kleinian-spectra geometry v1\ndim = 2\nmodel = ball\n0,1,1.5,1\n0,-1,1.5,1\n",
    };
    for (const auto& s : bad) {
        std::istringstream is(s);
        EXPECT_THROW(io::read_geometry(is), ContractError) << s;
    }
}

TEST(Compare, DeviationAndAlignment) {
    const auto closed = closed_form_profile({0.75, 1, 1}, SpectrumKind::set_assouad, {0.25, 0.5});
    auto emp = closed;
    emp.source = ProfileSource::empirical;
    emp.values = {0.9, 0.95};
    emp.stderrs = {0.01, 0.02};
    const auto r = io::compare_profiles(closed, emp, 0.1);
    EXPECT_NEAR(r.max_deviation, 0.0666666666667, 1e-12);
    EXPECT_TRUE(r.pass);
    EXPECT_FALSE(io::compare_profiles(closed, emp, 0.05).pass);
    std::ostringstream out;
    io::write_compare_csv(out, r);
    EXPECT_NE(out.str().find("# result: PASS"), std::string::npos);
    emp.theta = {0.25, 0.55};
    EXPECT_THROW(io::compare_profiles(closed, emp, 0.1), ContractError);
    emp.theta = {0.25};
    EXPECT_THROW(io::compare_profiles(closed, emp, 0.1), ContractError);
}

TEST(Svg, DeterministicAndRejectsEmpty) {
    const auto p = closed_form_profile({1.2, 1, 2}, SpectrumKind::mu_assouad, default_theta_grid());
    const auto a = io::render_svg({p}, {"a <b>"}, "t&t");
    EXPECT_EQ(a, io::render_svg({p}, {"a <b>"}, "t&t"));
    EXPECT_EQ(a.rfind("<svg", 0), 0u);
    EXPECT_NE(a.find("a &lt;b&gt;"), std::string::npos);
    EXPECT_NE(a.find("t&amp;t"), std::string::npos);
    SpectrumProfile empty;
    EXPECT_THROW(io::render_svg({empty}, {"x"}), ContractError);
    EXPECT_THROW(io::render_svg({}, {}), ContractError);
    EXPECT_THROW(io::render_svg({p}, {}), ContractError);
}
