#pragma once

// Ordinary least squares for a single regressor.

#include "nclab/error.hpp"

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace nclab {

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double intercept_stderr = 0.0;
    double residual_norm = 0.0;
    std::size_t points = 0;
    std::string model;
    std::vector<double> residuals;
};

/// y = intercept + slope * x
inline FitResult ols(std::span<const double> x, std::span<const double> y, std::string model = "y = a + b x") {
    require(x.size() == y.size(), "fit input length mismatch");
    require(x.size() >= 2, "a fit needs at least two points");
    const double n = double(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    double scale = 0.0;
    for (double v : x) scale = std::max(scale, std::abs(v));
    require(sxx > 1e-24 * std::max(1.0, scale * scale) * n, "ill-conditioned fit: regressor values coincide");

    FitResult f;
    f.model = std::move(model);
    f.points = x.size();
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double r = y[i] - (f.intercept + f.slope * x[i]);
        f.residuals.push_back(r);
        ss += r * r;
    }
    f.residual_norm = std::sqrt(ss);
    if (x.size() > 2) {
        double s2 = ss / (n - 2.0);
        f.slope_stderr = std::sqrt(s2 / sxx);
        f.intercept_stderr = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
    }
    return f;
}

/// log y = intercept + slope * log x
inline FitResult fit_loglog(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size(), "fit input length mismatch");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        require(x[i] > 0.0 && y[i] > 0.0, "log-log fit needs positive values");
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    return ols(lx, ly, "log y = a + b log x");
}

} // namespace nclab
