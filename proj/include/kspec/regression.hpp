#pragma once

#include <cmath>
#include <span>

#include "kspec/error.hpp"

namespace kspec {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    std::size_t points = 0;
};

/// Ordinary least squares y = slope * x + intercept. The slope standard
/// error is sqrt(SSR / (n - 2) / Sxx); zero when n == 2.
inline LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size(), "fit_line: size mismatch");
    const std::size_t n = x.size();
    require(n >= 2, "fit_line: need at least two points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    require(sxx > 0.0, "fit_line: abscissae are all equal");
    LinearFit f;
    f.points = n;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (n > 2) {
        double ssr = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - (f.slope * x[i] + f.intercept);
            ssr += r * r;
        }
        f.slope_stderr = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
    }
    return f;
}

}  // namespace kspec
