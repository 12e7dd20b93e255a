#pragma once

// Closed-form dimension theory of geometrically finite Kleinian groups with
// parabolics: box dimension, Assouad/lower spectra of the limit set and of the
// Patterson-Sullivan measure, the endpoint dimensions, and the inverted
// lattice spectrum.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kspec/error.hpp"

namespace kspec {

struct SpectralParameters {
    double delta = 0.0;
    int k_min = 1;
    int k_max = 1;
    int d = 2;

    SpectralParameters() = default;
    SpectralParameters(double delta_, int k_min_, int k_max_, int d_ = 2)
        : delta(delta_), k_min(k_min_), k_max(k_max_), d(d_) {
        validate();
    }

    void validate() const {
        require(d == 1 || d == 2, "spectral parameters: boundary dimension d must be 1 or 2");
        require(k_min >= 1, "spectral parameters: k_min must be >= 1");
        require(k_min <= k_max, "spectral parameters: k_min must not exceed k_max");
        require(k_max <= d, "spectral parameters: k_max must not exceed d");
        require(std::isfinite(delta), "spectral parameters: delta must be finite");
        require(delta > 0.5 * k_max,
                "spectral parameters: delta must exceed k_max/2 (got delta=" + std::to_string(delta) +
                    ", k_max=" + std::to_string(k_max) + ")");
        require(delta <= d, "spectral parameters: delta must not exceed d");
    }
};

namespace detail {

inline void check_theta(double theta) {
    require(theta > 0.0 && theta < 1.0, "theta must lie in the open interval (0, 1)");
}

/// min{1, theta/(1-theta)}: the interpolation weight shared by every branch.
inline double phase(double theta) { return theta >= 0.5 ? 1.0 : theta / (1.0 - theta); }

}  // namespace detail

inline double mu_box_dimension(const SpectralParameters& p) {
    p.validate();
    return std::max(p.delta, 2.0 * p.delta - p.k_min);
}

inline double mu_assouad_spectrum(const SpectralParameters& p, double theta) {
    p.validate();
    detail::check_theta(theta);
    const double w = detail::phase(theta), s = p.delta;
    if (s < p.k_min) return s + w * (p.k_max - s);
    if (s < 0.5 * (p.k_min + p.k_max)) return 2.0 * s - p.k_min + w * (p.k_min + p.k_max - 2.0 * s);
    return 2.0 * s - p.k_min;
}

inline double mu_lower_spectrum(const SpectralParameters& p, double theta) {
    p.validate();
    detail::check_theta(theta);
    const double w = detail::phase(theta), s = p.delta;
    if (s > p.k_max) return s - w * (s - p.k_min);
    if (s > 0.5 * (p.k_min + p.k_max)) return 2.0 * s - p.k_max - w * (2.0 * s - p.k_min - p.k_max);
    return 2.0 * s - p.k_max;
}

inline double set_assouad_spectrum(const SpectralParameters& p, double theta) {
    p.validate();
    detail::check_theta(theta);
    if (p.delta >= p.k_max) return p.delta;
    return p.delta + detail::phase(theta) * (p.k_max - p.delta);
}

inline double set_lower_spectrum(const SpectralParameters& p, double theta) {
    p.validate();
    detail::check_theta(theta);
    if (p.delta <= p.k_min) return p.delta;
    return p.delta - detail::phase(theta) * (p.delta - p.k_min);
}

struct EndpointDimensions {
    double set_assouad, set_lower, mu_assouad, mu_lower;
};

inline EndpointDimensions endpoint_dimensions(const SpectralParameters& p) {
    p.validate();
    const double s = p.delta;
    return {std::max<double>(s, p.k_max), std::min<double>(s, p.k_min),
            std::max<double>(2.0 * s - p.k_min, p.k_max), std::min<double>(2.0 * s - p.k_max, p.k_min)};
}

/// Assouad spectrum of the inverted lattice {m/|m|^2 : m in Z^k}.
inline double lattice_spectrum(int k, double theta) {
    require(k >= 1, "lattice_spectrum: k must be >= 1");
    detail::check_theta(theta);
    return std::min(static_cast<double>(k), k / (2.0 * (1.0 - theta)));
}

/// Upper bound for the Assouad spectrum of any bounded set in terms of its
/// Assouad and upper box dimensions.
inline double general_assouad_upper_bound(double assouad_dim, double box_dim, double theta) {
    detail::check_theta(theta);
    return std::min(assouad_dim, box_dim / (1.0 - theta));
}

/// Lower bound for the Assouad spectrum below a phase transition at rho,
/// valid when the lower and upper box dimensions agree.
inline double phase_transition_lower_bound(double assouad_dim, double box_dim, double rho, double theta) {
    require(rho > 0.0 && rho < 1.0, "phase_transition_lower_bound: rho must lie in (0, 1)");
    detail::check_theta(theta);
    require(theta < rho, "phase_transition_lower_bound: theta must be below rho");
    return box_dim + (1.0 - rho) * theta / ((1.0 - theta) * rho) * (assouad_dim - box_dim);
}

enum class SpectrumKind { set_assouad, set_lower, mu_assouad, mu_lower };
enum class ProfileSource { closed_form, empirical };

inline std::string_view to_string(SpectrumKind k) {
    switch (k) {
        case SpectrumKind::set_assouad: return "set-assouad";
        case SpectrumKind::set_lower: return "set-lower";
        case SpectrumKind::mu_assouad: return "mu-assouad";
        case SpectrumKind::mu_lower: return "mu-lower";
    }
    return "?";
}

inline std::string_view to_string(ProfileSource s) {
    return s == ProfileSource::closed_form ? "closed-form" : "empirical";
}

inline std::optional<SpectrumKind> parse_spectrum_kind(std::string_view s) {
    for (auto k : {SpectrumKind::set_assouad, SpectrumKind::set_lower, SpectrumKind::mu_assouad, SpectrumKind::mu_lower})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

inline std::optional<ProfileSource> parse_profile_source(std::string_view s) {
    if (s == "closed-form") return ProfileSource::closed_form;
    if (s == "empirical") return ProfileSource::empirical;
    return std::nullopt;
}

inline bool is_assouad(SpectrumKind k) { return k == SpectrumKind::set_assouad || k == SpectrumKind::mu_assouad; }

struct SpectrumProfile {
    std::vector<double> theta;
    std::vector<double> values;
    std::vector<double> stderrs;
    SpectrumKind kind = SpectrumKind::set_assouad;
    ProfileSource source = ProfileSource::closed_form;

    void validate(int d = 2) const {
        require(!theta.empty(), "spectrum profile: empty");
        require(values.size() == theta.size() && stderrs.size() == theta.size(), "spectrum profile: column lengths differ");
        for (std::size_t i = 0; i < theta.size(); ++i) {
            require(theta[i] > 0.0 && theta[i] < 1.0, "spectrum profile: theta outside (0, 1)");
            if (i > 0) require(theta[i] > theta[i - 1], "spectrum profile: theta grid must be increasing");
            require(values[i] >= 0.0 && values[i] <= 2.0 * d, "spectrum profile: value outside [0, 2d]");
        }
        if (source != ProfileSource::closed_form) return;
        for (std::size_t i = 1; i < theta.size(); ++i) {
            const double step = values[i] - values[i - 1];
            require(is_assouad(kind) ? step >= -1e-12 : step <= 1e-12,
                    "spectrum profile: closed-form profile is not monotone in theta");
        }
    }
};

/// theta = 0.01, 0.02, ..., 0.99.
inline std::vector<double> default_theta_grid() {
    std::vector<double> g;
    for (int i = 1; i <= 99; ++i) g.push_back(i / 100.0);
    return g;
}

inline double closed_form_spectrum(const SpectralParameters& p, SpectrumKind kind, double theta) {
    switch (kind) {
        case SpectrumKind::set_assouad: return set_assouad_spectrum(p, theta);
        case SpectrumKind::set_lower: return set_lower_spectrum(p, theta);
        case SpectrumKind::mu_assouad: return mu_assouad_spectrum(p, theta);
        case SpectrumKind::mu_lower: return mu_lower_spectrum(p, theta);
    }
    return 0.0;
}

inline SpectrumProfile closed_form_profile(const SpectralParameters& p, SpectrumKind kind, const std::vector<double>& grid) {
    SpectrumProfile prof;
    prof.kind = kind;
    prof.source = ProfileSource::closed_form;
    for (double t : grid) {
        prof.theta.push_back(t);
        prof.values.push_back(closed_form_spectrum(p, kind, t));
        prof.stderrs.push_back(0.0);
    }
    prof.validate(p.d);
    return prof;
}

}  // namespace kspec
