// kspec: generate clouds, estimate exponents and spectra, evaluate closed
// forms, compare and plot. Exit codes: 0 ok, 1 compare failed, 2 invalid
// input, 3 estimator or data error.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kspec/empirical.hpp"
#include "kspec/io.hpp"
#include "kspec/poincare.hpp"

namespace {

using namespace kspec;

struct GroupArgs {
    std::string preset;
    double lambda = 4.0, c = 4.0, ell = 10.0;
};

std::optional<GroupPresentation> group_preset(const GroupArgs& a) {
    if (a.preset == "identity") return presets::identity_group();
    if (a.preset == "cyclic-parabolic") return presets::cyclic_parabolic();
    if (a.preset == "two-parabolic") return presets::two_parabolic(a.lambda, a.c);
    if (a.preset == "schottky") return presets::schottky(a.ell);
    return std::nullopt;
}

void add_group_options(CLI::App* sub, GroupArgs& g) {
    sub->add_option("--lambda", g.lambda, "two-parabolic translation length")->capture_default_str();
    sub->add_option("--c", g.c, "two-parabolic lower-triangular entry")->capture_default_str();
    sub->add_option("--ell", g.ell, "schottky translation length")->capture_default_str();
}

/// Writes to `path`, or stdout for "-", only after the content is complete.
void emit(const std::string& path, const std::string& content) {
    if (path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw EstimatorError("cannot open '" + path + "' for writing");
    f << content;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw EstimatorError("cannot open '" + path + "'");
    return f;
}

/// Resolved options of a subcommand, without the output path.
io::ConfigEcho echo_config(const CLI::App* sub) {
    io::ConfigEcho cfg;
    cfg.emplace_back("command", sub->get_name());
    for (const CLI::Option* opt : sub->get_options()) {
        const std::string name = opt->get_single_name();
        if (name == "help" || name == "out" || !opt->get_lnames().size()) continue;
        std::string value;
        if (opt->count() > 0) {
            for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
        } else {
            value = opt->get_default_str();
        }
        if (!value.empty()) cfg.emplace_back(name, value);
    }
    return cfg;
}

bool user_gave(const std::vector<std::string>& args, const std::string& flag) {
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

/// Injects `--key value` for every config-file key the command line does
/// not set, so flags take precedence over the file.
std::vector<std::string> merge_config(CLI::App& app, std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;
    auto in = open_input(path);
    const auto cfg = io::read_config(in);
    std::size_t sub_pos = args.size();
    CLI::App* sub = nullptr;
    for (std::size_t i = 0; i < args.size() && !sub; ++i)
        for (CLI::App* s : app.get_subcommands([](CLI::App*) { return true; }))
            if (args[i] == s->get_name()) sub = s, sub_pos = i;
    std::vector<std::string> global, local;
    for (const auto& [key, value] : cfg) {
        const std::string flag = "--" + key;
        if (key == "config") throw ContractError("config: a config file cannot name another config file");
        if (user_gave(args, flag)) continue;
        if (sub && sub->get_option_no_throw(flag)) {
            local.insert(local.end(), {flag, value});
        } else if (app.get_option_no_throw(flag)) {
            global.insert(global.end(), {flag, value});
        } else {
            throw ContractError("config: unknown key '" + key + "'");
        }
    }
    std::vector<std::string> out(global);
    out.insert(out.end(), args.begin(), args.begin() + static_cast<std::ptrdiff_t>(std::min(sub_pos + 1, args.size())));
    out.insert(out.end(), local.begin(), local.end());
    if (sub_pos + 1 < args.size()) out.insert(out.end(), args.begin() + static_cast<std::ptrdiff_t>(sub_pos + 1), args.end());
    return out;
}

SpectralParameters spectral(double delta, int k_min, int k_max, int d) { return SpectralParameters(delta, k_min, k_max, d); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Assouad and lower spectra of Kleinian limit sets and Patterson-Sullivan measures"};
    app.require_subcommand(1);
    unsigned threads = 1;
    std::string config_path;
    app.add_option("--threads", threads, "worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
    app.add_option("--config", config_path, "key = value file; command-line flags take precedence");

    // gen
    auto* gen = app.add_subcommand("gen", "write a point cloud (or a synthetic cusp geometry)");
    GroupArgs gen_group;
    int gen_n = 1000, gen_k = 1, gen_len = 8, gen_dim = 3, gen_parent = 2, gen_child = 1;
    double gen_eps = 0.0;
    std::size_t gen_cap = 5'000'000;
    std::string gen_chart, gen_out = "-";
    gen->add_option("--preset", gen_group.preset,
                    "reciprocal | inverted-lattice | grid | identity | cyclic-parabolic | two-parabolic | schottky | synthetic-geometry")
        ->required();
    gen->add_option("--n", gen_n, "N for reciprocal / inverted-lattice / grid")->capture_default_str();
    gen->add_option("--k", gen_k, "lattice rank (1 or 2)")->capture_default_str();
    add_group_options(gen, gen_group);
    gen->add_option("--max-word-len", gen_len, "word length for group presets")->capture_default_str();
    gen->add_option("--eps", gen_eps, "stop extending a word once its images span less than eps")->capture_default_str();
    gen->add_option("--chart", gen_chart, "angle | plane (default: angle for H^2)");
    gen->add_option("--max-points", gen_cap, "memory guard")->capture_default_str();
    gen->add_option("--dim", gen_dim, "synthetic-geometry: hyperbolic dimension")->capture_default_str();
    gen->add_option("--parent-rank", gen_parent, "synthetic-geometry: rank of the horoball at infinity")->capture_default_str();
    gen->add_option("--child-rank", gen_child, "synthetic-geometry: rank of the chain below it")->capture_default_str();
    gen->add_option("--out", gen_out, "output path, - for stdout")->capture_default_str();

    // delta
    auto* del = app.add_subcommand("delta", "estimate the Poincare exponent of a group preset");
    GroupArgs del_group;
    int del_len = 12, del_points = 60;
    std::string del_out;
    del->add_option("--preset", del_group.preset, "identity | cyclic-parabolic | two-parabolic | schottky")->required();
    add_group_options(del, del_group);
    del->add_option("--max-word-len", del_len, "enumeration depth")->capture_default_str();
    del->add_option("--grid-points", del_points, "thresholds on [0, T_sat]")->capture_default_str();
    del->add_option("--out", del_out, "CSV file to append the estimate to");

    // formula
    auto* form = app.add_subcommand("formula", "evaluate a closed-form spectrum");
    std::string form_target = "set-assouad", form_out = "-";
    double form_delta = 0.0;
    int form_kmin = 1, form_kmax = 1, form_d = 2, form_k = 1;
    std::vector<double> form_theta;
    form->add_option("--target", form_target, "set-assouad | set-lower | mu-assouad | mu-lower | mu-box | lattice")
        ->capture_default_str();
    form->add_option("--delta", form_delta, "Poincare exponent");
    form->add_option("--k-min", form_kmin)->capture_default_str();
    form->add_option("--k-max", form_kmax)->capture_default_str();
    form->add_option("--d", form_d, "boundary dimension")->capture_default_str();
    form->add_option("--k", form_k, "lattice rank for --target lattice")->capture_default_str();
    form->add_option("--theta", form_theta, "comma-separated theta values (default 0.01..0.99)")->delimiter(',');
    form->add_option("--out", form_out)->capture_default_str();

    // spectrum
    auto* spec = app.add_subcommand("spectrum", "estimate a spectrum from a cloud or a measure model");
    std::string spec_cloud, spec_geom, spec_kind = "assouad", spec_centers = "2000", spec_method = "grid-boxes", spec_out = "-";
    std::vector<double> spec_theta{0.25, 0.5, 0.75}, spec_T{40.0};
    double spec_rmin = 0.0, spec_rmax = 1e-2, spec_delta = 0.0, spec_ulo = -25, spec_uhi = 25, spec_ustep = 0.02;
    int spec_spd = 4;
    auto* cloud_opt = spec->add_option("--cloud", spec_cloud, "cloud CSV");
    spec->add_option("--geometry", spec_geom, "cusp geometry file (measure spectra)")->excludes(cloud_opt);
    spec->add_option("--kind", spec_kind, "assouad | lower (clouds), mu-assouad | mu-lower (geometries)")->capture_default_str();
    spec->add_option("--theta", spec_theta, "comma-separated theta values")->delimiter(',')->capture_default_str();
    spec->add_option("--r-min", spec_rmin, "smallest scale; 0 means 10 x resolution")->capture_default_str();
    spec->add_option("--r-max", spec_rmax, "largest scale")->capture_default_str();
    spec->add_option("--scales-per-decade", spec_spd)->capture_default_str();
    spec->add_option("--centers", spec_centers, "all, or the size of the stratified centre sample")->capture_default_str();
    spec->add_option("--method", spec_method, "grid-boxes | exact-1d")->capture_default_str();
    spec->add_option("--delta", spec_delta, "measure model exponent");
    spec->add_option("--T", spec_T, "geodesic depths for the measure sweep")->delimiter(',')->capture_default_str();
    spec->add_option("--u-lo", spec_ulo)->capture_default_str();
    spec->add_option("--u-hi", spec_uhi)->capture_default_str();
    spec->add_option("--u-step", spec_ustep, "sweep points +-e^u")->capture_default_str();
    spec->add_option("--out", spec_out)->capture_default_str();

    // compare
    auto* cmp = app.add_subcommand("compare", "compare an empirical profile with a closed form");
    std::string cmp_emp, cmp_closed, cmp_out = "-";
    double cmp_delta = 0.0, cmp_tol = 0.1;
    int cmp_kmin = 1, cmp_kmax = 1, cmp_d = 2, cmp_lattice = 0;
    cmp->add_option("--empirical", cmp_emp, "empirical profile CSV")->required();
    auto* closed_opt = cmp->add_option("--closed", cmp_closed, "closed-form profile CSV");
    cmp->add_option("--delta", cmp_delta)->excludes(closed_opt);
    cmp->add_option("--k-min", cmp_kmin)->capture_default_str();
    cmp->add_option("--k-max", cmp_kmax)->capture_default_str();
    cmp->add_option("--d", cmp_d)->capture_default_str();
    cmp->add_option("--lattice", cmp_lattice, "compare with the inverted-lattice spectrum of this rank")->excludes(closed_opt);
    cmp->add_option("--tolerance", cmp_tol)->capture_default_str();
    cmp->add_option("--out", cmp_out)->capture_default_str();

    // plot
    auto* plot = app.add_subcommand("plot", "draw profiles as an SVG");
    std::vector<std::string> plot_in;
    std::string plot_out = "-", plot_title;
    plot->add_option("profiles", plot_in, "profile CSV files")->required();
    plot->add_option("--title", plot_title);
    plot->add_option("--out", plot_out)->capture_default_str();

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = merge_config(app, std::move(args));
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const ContractError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }

    try {
        set_thread_count(threads);

        if (*gen) {
            std::ostringstream out;
            if (gen_group.preset == "synthetic-geometry") {
                SyntheticGeometrySpec s;
                s.dim = gen_dim;
                s.parent_rank = gen_parent;
                s.child_rank = gen_child;
                io::write_geometry(out, synthetic_cusp_geometry(s));
            } else {
                PointCloud cloud;
                if (gen_group.preset == "reciprocal") {
                    cloud = synth_reciprocal_set(gen_n);
                } else if (gen_group.preset == "grid") {
                    cloud = synth_uniform_grid(gen_n);
                } else if (gen_group.preset == "inverted-lattice") {
                    cloud = synth_inverted_lattice(gen_k, gen_n);
                } else if (auto G = group_preset(gen_group)) {
                    SampleOptions opt;
                    opt.max_len = gen_len;
                    opt.eps = gen_eps;
                    opt.max_points = gen_cap;
                    if (gen_chart == "angle") opt.chart = Chart::angle;
                    else if (gen_chart == "plane") opt.chart = Chart::plane;
                    else if (!gen_chart.empty()) throw ContractError("gen: unknown chart '" + gen_chart + "'");
                    cloud = sample_limit_set(*G, opt);
                } else {
                    throw ContractError("gen: unknown preset '" + gen_group.preset + "'");
                }
                io::write_cloud_csv(out, cloud, echo_config(gen));
            }
            emit(gen_out, out.str());
            return 0;
        }

        if (*del) {
            const auto G = group_preset(del_group);
            if (!G) throw ContractError("delta: unknown group preset '" + del_group.preset + "'");
            const OrbitSample sample = enumerate_orbit(*G, ModelPoint::half_space_base(G->dim()), del_len);
            const auto curve = orbit_counting_curve(sample, default_delta_grid(sample, del_points));
            const DeltaEstimate e = estimate_delta(curve);
            std::cout << "delta = " << io::fmt(e.delta, 6) << "  stderr = " << io::fmt(e.std_error, 6) << "  window = ["
                      << io::fmt(e.window_lo, 6) << ", " << io::fmt(e.window_hi, 6) << "]  points = " << e.window_points << '\n';
            if (!e.warning.empty()) std::cerr << "warning: " << e.warning << '\n';
            if (!del_out.empty()) {
                const bool fresh = !std::filesystem::exists(del_out) || std::filesystem::file_size(del_out) == 0;
                std::ofstream f(del_out, std::ios::app | std::ios::binary);
                if (!f) throw EstimatorError("cannot open '" + del_out + "' for appending");
                if (fresh) f << "preset,max_word_len,delta,stderr,window_lo,window_hi,window_points,clamped\n";
                f << G->name() << ',' << del_len << ',' << io::fmt(e.delta) << ',' << io::fmt(e.std_error) << ','
                  << io::fmt(e.window_lo) << ',' << io::fmt(e.window_hi) << ',' << e.window_points << ','
                  << (e.clamped ? "true" : "false") << '\n';
            }
            return 0;
        }

        if (*form) {
            const auto grid = form_theta.empty() ? default_theta_grid() : form_theta;
            std::ostringstream out;
            if (form_target == "mu-box") {
                out << io::kProfileHeader << '\n'
                    << ',' << io::fmt(mu_box_dimension(spectral(form_delta, form_kmin, form_kmax, form_d))) << ",0,mu-box,closed-form\n";
                io::write_config_echo(out, echo_config(form));
            } else if (form_target == "lattice") {
                SpectrumProfile p;
                p.kind = SpectrumKind::set_assouad;
                for (double t : grid) {
                    p.theta.push_back(t);
                    p.values.push_back(lattice_spectrum(form_k, t));
                    p.stderrs.push_back(0.0);
                }
                p.validate(std::max(form_k, 1));
                io::write_profile_csv(out, p, echo_config(form));
            } else {
                const auto kind = parse_spectrum_kind(form_target);
                if (!kind) throw ContractError("formula: unknown target '" + form_target + "'");
                const auto p = spectral(form_delta, form_kmin, form_kmax, form_d);
                io::write_profile_csv(out, closed_form_profile(p, *kind, grid), echo_config(form));
            }
            emit(form_out, out.str());
            return 0;
        }

        if (*spec) {
            std::ostringstream out;
            if (!spec_geom.empty()) {
                const auto kind = parse_spectrum_kind(spec_kind);
                if (!kind || (*kind != SpectrumKind::mu_assouad && *kind != SpectrumKind::mu_lower))
                    throw ContractError("spectrum: a geometry needs --kind mu-assouad or mu-lower");
                auto in = open_input(spec_geom);
                const MeasureModel M(spec_delta, io::read_geometry(in));
                MeasureSweep sweep{sweep_boundary_points(M.geometry(), spec_ulo, spec_uhi, spec_ustep), spec_T};
                io::write_profile_csv(out, measure_spectrum_profile(M, sweep, *kind, spec_theta), echo_config(spec));
            } else {
                if (spec_cloud.empty()) throw ContractError("spectrum: give --cloud or --geometry");
                SetSpectrumKind kind;
                if (spec_kind == "assouad" || spec_kind == "set-assouad") kind = SetSpectrumKind::assouad;
                else if (spec_kind == "lower" || spec_kind == "set-lower") kind = SetSpectrumKind::lower;
                else throw ContractError("spectrum: a cloud needs --kind assouad or lower");
                EstimatorConfig cfg;
                cfg.theta_grid = spec_theta;
                cfg.r_min = spec_rmin;
                cfg.r_max = spec_rmax;
                cfg.scales_per_decade = spec_spd;
                if (spec_centers == "all") {
                    cfg.centers.mode = CenterStrategy::Mode::all;
                } else {
                    std::size_t n = 0;
                    try {
                        n = std::stoul(spec_centers);
                    } catch (const std::exception&) {
                        throw ContractError("spectrum: --centers must be 'all' or a positive count");
                    }
                    if (n == 0) throw ContractError("spectrum: --centers must be 'all' or a positive count");
                    cfg.centers.n = n;
                }
                const auto method = parse_covering_method(spec_method);
                if (!method) throw ContractError("spectrum: unknown method '" + spec_method + "'");
                cfg.method = *method;
                auto in = open_input(spec_cloud);
                const PointCloud cloud = io::read_cloud_csv(in);
                const auto est = estimate_spectrum_profile(cloud, kind, cfg);
                auto echo = echo_config(spec);
                echo.emplace_back("normalisation", io::fmt(est.front().scale_factor));
                io::write_profile_csv(out, to_profile(est, kind), echo);
            }
            emit(spec_out, out.str());
            return 0;
        }

        if (*cmp) {
            auto ein = open_input(cmp_emp);
            const SpectrumProfile emp = io::read_profile_csv(ein);
            SpectrumProfile closed;
            if (!cmp_closed.empty()) {
                auto cin = open_input(cmp_closed);
                closed = io::read_profile_csv(cin);
                if (closed.kind != emp.kind) throw ContractError("compare: profiles have different kinds");
            } else if (cmp_lattice > 0) {
                closed = emp;
                for (std::size_t i = 0; i < emp.theta.size(); ++i) closed.values[i] = lattice_spectrum(cmp_lattice, emp.theta[i]);
            } else {
                closed = closed_form_profile(spectral(cmp_delta, cmp_kmin, cmp_kmax, cmp_d), emp.kind, emp.theta);
            }
            const io::CompareReport r = io::compare_profiles(closed, emp, cmp_tol);
            std::ostringstream out;
            io::write_compare_csv(out, r, echo_config(cmp));
            emit(cmp_out, out.str());
            std::cerr << "max deviation " << io::fmt(r.max_deviation, 6) << " (tolerance " << io::fmt(r.tolerance, 6) << "): "
                      << (r.pass ? "PASS" : "FAIL") << '\n';
            return r.pass ? 0 : 1;
        }

        if (*plot) {
            std::vector<SpectrumProfile> profiles;
            std::vector<std::string> labels;
            for (const auto& path : plot_in) {
                auto in = open_input(path);
                profiles.push_back(io::read_profile_csv(in));
                labels.push_back(std::filesystem::path(path).stem().string());
            }
            emit(plot_out, io::render_svg(profiles, labels, plot_title));
            return 0;
        }
    } catch (const ContractError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
