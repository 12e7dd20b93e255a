#pragma once

// Flat-file formats: cloud CSV v1, profile CSV v1, key = value config files,
// cusp geometry declarations, compare reports and SVG profile plots.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kspec/error.hpp"
#include "kspec/formulas.hpp"
#include "kspec/measure.hpp"
#include "kspec/sampler.hpp"

namespace kspec::io {

using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

inline constexpr std::string_view kCloudHeader = "# kleinian-spectra cloud v1";
inline constexpr std::string_view kProfileHeader = "theta,value,stderr,kind,source";
inline constexpr std::string_view kGeometryHeader = "# kleinian-spectra geometry v1";

/// %.12g by default; geometry files use 17 digits so they read back exactly.
inline std::string fmt(double v, int digits = 12) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) v = 0.0;  // no negative zero in files
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    for (;;) {
        const auto k = s.find(sep);
        out.push_back(trim(s.substr(0, k)));
        if (k == std::string_view::npos) return out;
        s.remove_prefix(k + 1);
    }
}

inline double parse_double(std::string_view s, const std::string& where) {
    s = trim(s);
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto [p, ec] = std::from_chars(s.data(), end, v);
    require(ec == std::errc() && p == end && !s.empty(), where + ": cannot parse number '" + std::string(s) + "'");
    return v;
}

inline void write_config_echo(std::ostream& out, const ConfigEcho& cfg) {
    for (const auto& [k, v] : cfg) out << "# config: " << k << " = " << v << '\n';
}

// ---------------------------------------------------------------------------
// Cloud CSV v1.

inline void write_cloud_csv(std::ostream& out, const PointCloud& c, const ConfigEcho& cfg = {}) {
    out << kCloudHeader << '\n';
    for (const auto& p : c.points()) {
        out << fmt(p[0]);
        if (c.dim() == 2) out << ',' << fmt(p[1]);
        out << '\n';
    }
    out << "# provenance: " << c.provenance() << '\n';
    out << "# resolution: " << fmt(c.resolution()) << '\n';
    for (const auto& f : c.flagged()) {
        out << "# flagged: " << fmt(f.center[0]);
        if (c.dim() == 2) out << ',' << fmt(f.center[1]);
        out << ',' << fmt(f.radius) << '\n';
    }
    write_config_echo(out, cfg);
}

inline PointCloud read_cloud_csv(std::istream& in) {
    std::string line;
    require(std::getline(in, line) && trim(line) == kCloudHeader, "cloud CSV: missing '# kleinian-spectra cloud v1' header");
    std::vector<Point2> pts;
    std::vector<FlaggedRegion> flags;
    std::string provenance;
    double resolution = -1.0;
    int dim = 0;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = "cloud CSV line " + std::to_string(lineno);
        std::string_view s = trim(line);
        if (s.empty()) continue;
        if (s.front() == '#') {
            s = trim(s.substr(1));
            const auto colon = s.find(':');
            if (colon == std::string_view::npos) continue;
            const auto key = trim(s.substr(0, colon));
            const auto val = trim(s.substr(colon + 1));
            if (key == "provenance") {
                provenance = std::string(val);
            } else if (key == "resolution") {
                resolution = parse_double(val, where);
            } else if (key == "flagged") {
                const auto f = split(val, ',');
                require(f.size() == 2 || f.size() == 3, where + ": flagged region needs centre and radius");
                FlaggedRegion r;
                r.center[0] = parse_double(f[0], where);
                if (f.size() == 3) r.center[1] = parse_double(f[1], where);
                r.radius = parse_double(f.back(), where);
                flags.push_back(r);
            }
            continue;
        }
        const auto f = split(s, ',');
        require(f.size() == 1 || f.size() == 2, where + ": a row holds one or two coordinates");
        if (dim == 0) dim = static_cast<int>(f.size());
        require(static_cast<int>(f.size()) == dim, where + ": inconsistent number of coordinates");
        pts.push_back({parse_double(f[0], where), f.size() == 2 ? parse_double(f[1], where) : 0.0});
    }
    require(!pts.empty(), "cloud CSV: no points");
    require(resolution > 0.0, "cloud CSV: missing or non-positive '# resolution:' footer");
    return PointCloud(dim, std::move(pts), resolution, provenance, std::move(flags));
}

// ---------------------------------------------------------------------------
// Profile CSV v1.

inline void write_profile_csv(std::ostream& out, const SpectrumProfile& p, const ConfigEcho& cfg = {}) {
    out << kProfileHeader << '\n';
    for (std::size_t i = 0; i < p.theta.size(); ++i)
        out << fmt(p.theta[i]) << ',' << fmt(p.values[i]) << ',' << fmt(p.stderrs[i]) << ',' << to_string(p.kind) << ','
            << to_string(p.source) << '\n';
    write_config_echo(out, cfg);
}

inline SpectrumProfile read_profile_csv(std::istream& in, int d = 2) {
    std::string line;
    require(std::getline(in, line) && trim(line) == kProfileHeader,
            "profile CSV: missing 'theta,value,stderr,kind,source' header");
    SpectrumProfile p;
    bool first = true;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = "profile CSV line " + std::to_string(lineno);
        const std::string_view s = trim(line);
        if (s.empty() || s.front() == '#') continue;
        const auto f = split(s, ',');
        require(f.size() == 5, where + ": expected 5 columns");
        require(!f[0].empty(), where + ": row has no theta (scalar output is not a profile)");
        const auto kind = parse_spectrum_kind(f[3]);
        const auto source = parse_profile_source(f[4]);
        require(kind.has_value(), where + ": unknown kind '" + std::string(f[3]) + "'");
        require(source.has_value(), where + ": unknown source '" + std::string(f[4]) + "'");
        if (first) {
            p.kind = *kind;
            p.source = *source;
            first = false;
        }
        require(*kind == p.kind && *source == p.source, where + ": kind/source differ from the first row");
        p.theta.push_back(parse_double(f[0], where));
        p.values.push_back(parse_double(f[1], where));
        p.stderrs.push_back(parse_double(f[2], where));
    }
    require(!p.theta.empty(), "profile CSV: empty profile");
    p.validate(d);
    return p;
}

// ---------------------------------------------------------------------------
// key = value configuration.

inline std::map<std::string, std::string> read_config(std::istream& in) {
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view s = trim(line);
        if (s.empty() || s.front() == '#') continue;
        const auto eq = s.find('=');
        require(eq != std::string_view::npos, "config line " + std::to_string(lineno) + ": expected 'key = value'");
        const auto key = trim(s.substr(0, eq));
        require(!key.empty(), "config line " + std::to_string(lineno) + ": empty key");
        out[std::string(key)] = std::string(trim(s.substr(eq + 1)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Cusp geometry declarations.
//
//   # kleinian-spectra geometry v1
//   dim = 3
//   model = ball                  (or half-space)
//   x0,x1,x2,size,rank            ball: unit-vector base and diameter
//   x0,x1,size,rank | inf,size,rank   half-space: plane base, or infinity

inline void write_geometry(std::ostream& out, const CuspGeometry& G) {
    out << kGeometryHeader << '\n' << "dim = " << G.dim() << '\n' << "model = ball\n";
    for (const auto& h : G.horoballs()) {
        for (int i = 0; i < G.dim(); ++i) out << fmt(h.ball.base()[i], 17) << ',';
        out << fmt(h.ball.size(), 17) << ',' << h.rank << '\n';
    }
}

inline CuspGeometry read_geometry(std::istream& in) {
    std::string line;
    require(std::getline(in, line) && trim(line) == kGeometryHeader,
            "geometry file: missing '# kleinian-spectra geometry v1' header");
    int dim = 0;
    Model model = Model::ball;
    std::vector<RankedHoroball> balls;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = "geometry line " + std::to_string(lineno);
        const std::string_view s = trim(line);
        if (s.empty() || s.front() == '#') continue;
        if (const auto eq = s.find('='); eq != std::string_view::npos) {
            const auto key = trim(s.substr(0, eq)), val = trim(s.substr(eq + 1));
            if (key == "dim") {
                dim = static_cast<int>(parse_double(val, where));
            } else if (key == "model") {
                require(val == "ball" || val == "half-space", where + ": model must be ball or half-space");
                model = val == "ball" ? Model::ball : Model::half_space;
            } else {
                throw ContractError(where + ": unknown key '" + std::string(key) + "'");
            }
            continue;
        }
        require(dim == 2 || dim == 3, where + ": 'dim = 2' or 'dim = 3' must precede the records");
        const auto f = split(s, ',');
        const double rank_v = parse_double(f.back(), where);
        require(rank_v == std::floor(rank_v), where + ": rank must be an integer");
        const int rank = static_cast<int>(rank_v);
        if (model == Model::ball) {
            require(static_cast<int>(f.size()) == dim + 2, where + ": expected " + std::to_string(dim + 2) + " fields");
            Vec3 v{0, 0, 0};
            for (int i = 0; i < dim; ++i) v[i] = parse_double(f[i], where);
            balls.push_back({Horoball(BoundaryPoint::on_sphere(dim, v), parse_double(f[dim], where)), rank});
        } else if (f.size() == 3 && f[0] == "inf") {
            balls.push_back({Horoball(BoundaryPoint::infinity(dim), parse_double(f[1], where)), rank});
        } else {
            require(static_cast<int>(f.size()) == dim + 1, where + ": expected " + std::to_string(dim + 1) + " fields");
            std::vector<double> x;
            for (int i = 0; i < dim - 1; ++i) x.push_back(parse_double(f[i], where));
            balls.push_back({Horoball(BoundaryPoint::on_plane(dim, x), parse_double(f[dim - 1], where)), rank});
        }
    }
    require(dim == 2 || dim == 3, "geometry file: missing 'dim ='");
    return CuspGeometry(dim, std::move(balls));
}

// ---------------------------------------------------------------------------
// Compare reports.

struct CompareReport {
    std::vector<double> theta;
    std::vector<double> closed_form;
    std::vector<double> empirical;
    std::vector<double> stderrs;
    double max_deviation = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

inline CompareReport compare_profiles(const SpectrumProfile& closed, const SpectrumProfile& emp, double tolerance) {
    require(tolerance >= 0.0, "compare: tolerance must be non-negative");
    require(closed.theta.size() == emp.theta.size(), "compare: theta grids have different lengths");
    CompareReport r;
    r.tolerance = tolerance;
    for (std::size_t i = 0; i < emp.theta.size(); ++i) {
        require(std::abs(closed.theta[i] - emp.theta[i]) <= 1e-12, "compare: theta grids are not aligned at row " + std::to_string(i + 1));
        r.theta.push_back(emp.theta[i]);
        r.closed_form.push_back(closed.values[i]);
        r.empirical.push_back(emp.values[i]);
        r.stderrs.push_back(emp.stderrs[i]);
        r.max_deviation = std::max(r.max_deviation, std::abs(closed.values[i] - emp.values[i]));
    }
    r.pass = r.max_deviation <= tolerance;
    return r;
}

inline void write_compare_csv(std::ostream& out, const CompareReport& r, const ConfigEcho& cfg = {}) {
    out << "theta,closed_form,empirical,stderr,abs_deviation\n";
    for (std::size_t i = 0; i < r.theta.size(); ++i)
        out << fmt(r.theta[i]) << ',' << fmt(r.closed_form[i]) << ',' << fmt(r.empirical[i]) << ',' << fmt(r.stderrs[i])
            << ',' << fmt(std::abs(r.closed_form[i] - r.empirical[i])) << '\n';
    out << "# max_deviation: " << fmt(r.max_deviation) << '\n';
    out << "# tolerance: " << fmt(r.tolerance) << '\n';
    out << "# result: " << (r.pass ? "PASS" : "FAIL") << '\n';
    write_config_echo(out, cfg);
}

// ---------------------------------------------------------------------------
// SVG plots.

inline std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

/// One polyline per profile over theta in [0, 1]; closed-form profiles are
/// solid, empirical ones dashed with point markers.
inline std::string render_svg(const std::vector<SpectrumProfile>& profiles, const std::vector<std::string>& labels,
                              const std::string& title = "") {
    require(!profiles.empty(), "plot: no profiles");
    require(labels.size() == profiles.size(), "plot: one label per profile");
    double ymax = 1.0;
    for (const auto& p : profiles) {
        require(!p.theta.empty(), "plot: empty profile");
        for (double v : p.values) ymax = std::max(ymax, v);
    }
    ymax = std::ceil(ymax * 1.1 * 4.0) / 4.0;
    const double W = 640, H = 420, L = 60, R = 20, T = 40, B = 50;
    const double pw = W - L - R, ph = H - T - B;
    auto X = [&](double t) { return fmt(L + t * pw, 6); };
    auto Y = [&](double v) { return fmt(T + (1.0 - v / ymax) * ph, 6); };
    static constexpr const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!title.empty())
        s << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
          << xml_escape(title) << "</text>\n";
    s << "<g stroke=\"#999\" stroke-width=\"0.5\">\n";
    for (int i = 0; i <= 4; ++i) s << "<line x1=\"" << X(i / 4.0) << "\" y1=\"" << Y(0) << "\" x2=\"" << X(i / 4.0) << "\" y2=\"" << Y(ymax) << "\"/>\n";
    for (double v = 0.0; v <= ymax + 1e-9; v += 0.25)
        s << "<line x1=\"" << X(0) << "\" y1=\"" << Y(v) << "\" x2=\"" << X(1) << "\" y2=\"" << Y(v) << "\"/>\n";
    s << "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
    for (int i = 0; i <= 4; ++i)
        s << "<text x=\"" << X(i / 4.0) << "\" y=\"" << fmt(H - B + 16, 6) << "\" text-anchor=\"middle\">" << fmt(i / 4.0) << "</text>\n";
    for (double v = 0.0; v <= ymax + 1e-9; v += 0.5)
        s << "<text x=\"" << fmt(L - 6, 6) << "\" y=\"" << Y(v) << "\" text-anchor=\"end\" dominant-baseline=\"middle\">" << fmt(v) << "</text>\n";
    s << "<text x=\"" << fmt(L + pw / 2, 6) << "\" y=\"" << fmt(H - 12, 6) << "\" text-anchor=\"middle\">theta</text>\n";
    s << "<text x=\"16\" y=\"" << fmt(T + ph / 2, 6) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << fmt(T + ph / 2, 6)
      << ")\">dimension</text>\n</g>\n";

    for (std::size_t k = 0; k < profiles.size(); ++k) {
        const auto& p = profiles[k];
        const char* color = colors[k % std::size(colors)];
        const bool empirical = p.source == ProfileSource::empirical;
        s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"" << (empirical ? " stroke-dasharray=\"6 4\"" : "")
          << " points=\"";
        for (std::size_t i = 0; i < p.theta.size(); ++i) s << (i ? " " : "") << X(p.theta[i]) << ',' << Y(p.values[i]);
        s << "\"/>\n";
        if (empirical)
            for (std::size_t i = 0; i < p.theta.size(); ++i)
                s << "<circle cx=\"" << X(p.theta[i]) << "\" cy=\"" << Y(p.values[i]) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        const double ly = T + 14.0 + 16.0 * static_cast<double>(k);
        s << "<line x1=\"" << fmt(L + 12, 6) << "\" y1=\"" << fmt(ly, 6) << "\" x2=\"" << fmt(L + 36, 6) << "\" y2=\"" << fmt(ly, 6)
          << "\" stroke=\"" << color << "\" stroke-width=\"2\"" << (empirical ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
        s << "<text x=\"" << fmt(L + 42, 6) << "\" y=\"" << fmt(ly, 6) << "\" dominant-baseline=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
          << xml_escape(labels[k]) << " (" << to_string(p.kind) << ", " << to_string(p.source) << ")</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

}  // namespace kspec::io
