#pragma once

// Explicit asymptotic quantities: blow-up rates, energy constants, the
// singular functions vbar1 / vbar1^0 and the gap integral used as the ground
// truth for every leading constant.

#include "nclab/error.hpp"
#include "nclab/geometry.hpp"
#include "nclab/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace nclab {

inline constexpr double kPi = std::numbers::pi;

inline bool admissible(int n, double m) { return n >= 2 && m >= std::max(2.0, double(n - 1)); }

inline void require_admissible(int n, double m) {
    require(admissible(n, m), "inadmissible (n, m) = (" + std::to_string(n) + ", " + std::to_string(m) +
                                  "): need m >= 2 for n = 2 and m >= n-1 for n >= 3");
}

/// rho_n(eps): sqrt(eps) for n = 2, 1/|log eps| for n = 3.
inline double rho_n(double eps, int n) {
    require(eps > 0.0 && eps < 1.0, "rate functions need 0 < eps < 1");
    require(n == 2 || n == 3, "rho_n is defined for n = 2, 3");
    return n == 2 ? std::sqrt(eps) : 1.0 / std::abs(std::log(eps));
}

/// True on the logarithmic branch m = n-1, n >= 3.
inline bool log_branch(int n, double m) { return n >= 3 && m == double(n - 1); }

/// Exponent p with rho_n^m(eps) = eps^p on the power branches (0 on the log branch).
inline double rate_exponent(int n, double m) {
    require_admissible(n, m);
    if (n == 2) return 1.0 - 1.0 / m;
    if (log_branch(n, m)) return 0.0;
    return 1.0 - double(n - 1) / m;
}

inline double rho_n_m(double eps, int n, double m) {
    require(eps > 0.0 && eps < 1.0, "rate functions need 0 < eps < 1");
    require_admissible(n, m);
    if (log_branch(n, m)) return 1.0 / std::abs(std::log(eps));
    return std::pow(eps, rate_exponent(n, m));
}

/// kappa_n as printed: sqrt(2) pi / sqrt(l1) (n = 2), pi / sqrt(l1 l2) (n = 3).
inline double kappa_n(double lambda1, std::optional<double> lambda2, int n) {
    require(lambda1 > 0.0, "curvatures must be positive");
    if (n == 2) return std::sqrt(2.0) * kPi / std::sqrt(lambda1);
    require(n == 3 && lambda2 && *lambda2 > 0.0, "kappa_3 needs two positive curvatures");
    return kPi / std::sqrt(lambda1 * *lambda2);
}

/// Surface measure of the unit sphere S^{n-2}, the polar factor for x' in R^{n-1}.
inline double sphere_measure(int n) {
    require(n >= 2, "dimension must be >= 2");
    double k = 0.5 * (n - 1);
    return 2.0 * std::pow(kPi, k) / std::tgamma(k);
}

/// int_0^inf r^(a-1) / (1 + r^m) dr = (pi/m) / sin(a pi / m), 0 < a < m.
inline double power_integral_analytic(double a, double m) {
    require(a > 0.0 && a < m, "divergent integral: need 0 < a < m");
    return (kPi / m) / std::sin(a * kPi / m);
}

inline double power_integral_quadrature(double a, double m, const QuadOptions& opt = {}) {
    require(a > 0.0 && a < m, "divergent integral: need 0 < a < m");
    auto f = [a, m](double r) { return std::pow(r, a - 1.0) / (1.0 + std::pow(r, m)); };
    // a < 1 leaves an integrable endpoint singularity at 0; fold it too.
    if (a < 1.0) {
        auto g = [a, m](double t) {
            // r = t^(1/a): dr r^(a-1) = dt / a
            double r = std::pow(t, 1.0 / a);
            return 1.0 / (a * (1.0 + std::pow(r, m)));
        };
        return integrate(g, 0.0, 1.0, opt).value + integrate_to_infinity(f, 1.0, opt).value;
    }
    return integrate_to_infinity(f, 0.0, opt).value;
}

struct LConstant {
    double analytic = 0.0;
    double quadrature = 0.0;
    double difference() const { return analytic - quadrature; }
};

/// L_{m,n} as defined for the three branches:
///   n = 2:            int_0^inf dy / (1 + y^m)
///   n >= 3, m = n-1:  omega_{n-1} / m
///   n >= 3, m > n-1:  omega_{n-1} int_0^inf r^(n-2) / (1 + r^m) dr
inline LConstant L_mn(double m, int n) {
    require_admissible(n, m);
    if (n == 2) return {power_integral_analytic(1.0, m), power_integral_quadrature(1.0, m)};
    double w = sphere_measure(n);
    if (log_branch(n, m)) {
        auto f = [m](double r) { return std::pow(r, m - 1.0) / (1.0 + std::pow(r, m)); };
        // int_0^1 r^(m-1)/(1+r^m) dr = log(2)/m
        double head = integrate(f, 0.0, 1.0).value;
        return {w / m, w * head / std::log(2.0)};
    }
    double a = double(n - 1);
    return {w * power_integral_analytic(a, m), w * power_integral_quadrature(a, m)};
}

// ---------------------------------------------------------------------------
// Gap integral oracle: int_{|x'|<R0} dx' / (eps + (h1 - h2)(x')).

inline QuadResult gap_integral_detailed(const InclusionPair& g, const QuadOptions& opt = {}) {
    const double eps = g.epsilon();
    require(eps > 0.0, "gap integral diverges at eps = 0");
    const NeckProfile& p = g.profile();
    const double r0 = g.neck_radius();
    const int n = g.dimension();

    if (p.radially_symmetric()) {
        const double lam = p.coefficient();
        const double m = p.order();
        auto radial = [&](double r) {
            return std::pow(r, double(n - 2)) / (eps + lam * std::pow(r, m));
        };
        // split at the inner length scale where eps ~ lam r^m
        double s = std::min(r0, std::pow(eps / lam, 1.0 / m));
        QuadResult a = integrate(radial, 0.0, s, opt);
        QuadResult b = integrate(radial, s, r0, opt);
        double w = sphere_measure(n);
        return {w * (a.value + b.value), w * (a.error + b.error), a.intervals + b.intervals};
    }

    // anisotropic quadratic, n = 3: polar in x', inner radial integral in closed form
    const double l1 = p.curvatures()[0];
    const double l2 = p.curvatures()[1];
    auto angular = [&](double th) {
        double a = 0.5 * (l1 * std::cos(th) * std::cos(th) + l2 * std::sin(th) * std::sin(th));
        return std::log1p(a * r0 * r0 / eps) / (2.0 * a);
    };
    return integrate(angular, 0.0, 2.0 * kPi, opt);
}

inline double gap_integral(const InclusionPair& g, const QuadOptions& opt = {}) {
    return gap_integral_detailed(g, opt).value;
}

/// Leading constant A with gap_integral ~ A / rho_n^m(eps), in closed form.
inline double oracle_constant_analytic(const NeckProfile& p, int n) {
    const double m = p.order();
    require_admissible(n, m);
    if (!p.radially_symmetric()) {
        require(n == 3, "anisotropic profiles need n = 3");
        return 2.0 * kPi / std::sqrt(p.curvatures()[0] * p.curvatures()[1]);
    }
    const double lam = p.coefficient();
    if (n == 2) return 2.0 * power_integral_analytic(1.0, m) * std::pow(lam, -1.0 / m);
    double w = sphere_measure(n);
    if (log_branch(n, m)) return w / (m * lam);
    return w * power_integral_analytic(double(n - 1), m) * std::pow(lam, -double(n - 1) / m);
}

/// Leading constant recovered from two quadratures: A = dG / d(1/rho). The
/// eps-independent part of the gap integral cancels in the difference.
inline double oracle_constant_numeric(const InclusionPair& g, double eps_a = 1e-9, double eps_b = 1e-10) {
    const int n = g.dimension();
    const double m = g.profile().order();
    double ga = gap_integral(g.with_epsilon(eps_a));
    double gb = gap_integral(g.with_epsilon(eps_b));
    return (gb - ga) / (1.0 / rho_n_m(eps_b, n, m) - 1.0 / rho_n_m(eps_a, n, m));
}

/// Stated closed-form leading constant: kappa_n for quadratic profiles, L lambda^((n-1)/m) otherwise.
inline double printed_constant(const NeckProfile& p, int n) {
    if (p.kind() == ProfileKind::Quadratic) {
        const auto& c = p.curvatures();
        return n == 2 ? kappa_n(c[0], std::nullopt, 2) : kappa_n(c[0], c.size() > 1 ? c[1] : c[0], 3);
    }
    const double m = p.order();
    return L_mn(m, n).analytic * std::pow(p.coefficient(), double(n - 1) / m);
}

struct ConstantsReport {
    int n = 2;
    double m = 2.0;
    double lambda = 1.0;
    std::optional<double> kappa;
    LConstant L;
    double omega = 0.0;
    double oracle_analytic = 0.0;
    double oracle_numeric = 0.0;
    double printed = 0.0;
    /// printed / oracle; 1 when the printed constant matches the gap integral.
    double printed_over_oracle() const { return printed / oracle_analytic; }
    /// L lambda^(-(n-1)/m): the proof's own placement of the lambda exponent.
    double L_lambda_inverse = 0.0;
};

inline ConstantsReport constants_report(const InclusionPair& g) {
    const NeckProfile& p = g.profile();
    ConstantsReport r;
    r.n = g.dimension();
    r.m = p.order();
    r.lambda = p.radially_symmetric() ? p.coefficient() : std::sqrt(p.curvatures()[0] * p.curvatures()[1]) / 2.0;
    if (p.kind() == ProfileKind::Quadratic) {
        const auto& c = p.curvatures();
        r.kappa = r.n == 2 ? kappa_n(c[0], std::nullopt, 2) : kappa_n(c[0], c.size() > 1 ? c[1] : c[0], 3);
    }
    r.L = L_mn(r.m, r.n);
    r.omega = sphere_measure(r.n);
    r.oracle_analytic = oracle_constant_analytic(p, r.n);
    r.oracle_numeric = oracle_constant_numeric(g);
    r.printed = printed_constant(p, r.n);
    if (p.radially_symmetric())
        r.L_lambda_inverse = r.L.analytic * std::pow(p.coefficient(), -double(r.n - 1) / r.m);
    return r;
}

// ---------------------------------------------------------------------------
// Singular functions.

namespace detail {
inline void split_point(const InclusionPair& g, std::span<const double> x, std::vector<double>& xp, double& xn) {
    require(static_cast<int>(x.size()) == g.dimension(), "point dimension mismatch");
    xp.assign(x.begin(), x.end() - 1);
    xn = x.back();
}
inline bool within_neck(const InclusionPair& g, std::span<const double> xp, double xn, double eps, double tol) {
    double r = 0.0;
    for (double v : xp) r += v * v;
    if (std::sqrt(r) > 2.0 * g.neck_radius() * (1.0 + 1e-12)) return false;
    Heights h = g.profile().heights(xp);
    double span = eps + h.upper - h.lower;
    return xn >= h.lower - tol * span && xn <= eps + h.upper + tol * span;
}
} // namespace detail

/// vbar1 = (x_n - h2(x')) / delta(x') on the closed neck Omega_{2R0}.
inline double vbar_eval(const InclusionPair& g, std::span<const double> x) {
    std::vector<double> xp;
    double xn;
    detail::split_point(g, x, xp, xn);
    require(detail::within_neck(g, xp, xn, g.epsilon(), 1e-12), "vbar1 is only defined on the neck Omega_{2R0}");
    Heights h = g.profile().heights(xp);
    return (xn - h.lower) / (g.epsilon() + h.upper - h.lower);
}

inline std::vector<double> grad_vbar(const InclusionPair& g, std::span<const double> x) {
    std::vector<double> xp;
    double xn;
    detail::split_point(g, x, xp, xn);
    require(detail::within_neck(g, xp, xn, g.epsilon(), 1e-12), "vbar1 is only defined on the neck Omega_{2R0}");
    const NeckProfile& p = g.profile();
    Heights h = p.heights(xp);
    double delta = g.epsilon() + h.upper - h.lower;
    std::vector<double> drel = p.relative_gradient(xp);
    std::vector<double> grad(x.size());
    double above = xn - h.lower;
    for (std::size_t j = 0; j < xp.size(); ++j) {
        double dh2 = -p.lower_share() * drel[j];
        grad[j] = (-dh2 * delta - above * drel[j]) / (delta * delta);
    }
    grad.back() = 1.0 / delta;
    return grad;
}

/// Touching-limit analogue (x_n - h2) / (h1 - h2), singular at x' = 0'.
inline double vbar0_eval(const InclusionPair& g, std::span<const double> x) {
    std::vector<double> xp;
    double xn;
    detail::split_point(g, x, xp, xn);
    double rel = g.profile().relative(xp);
    require(rel > 0.0, "vbar1^0 is singular at x' = 0'");
    require(detail::within_neck(g, xp, xn, 0.0, 1e-12), "vbar1^0 is only defined on Omega^0_{R0}");
    return (xn - g.profile().heights(xp).lower) / rel;
}

inline std::vector<double> grad_vbar0(const InclusionPair& g, std::span<const double> x) {
    require(static_cast<int>(x.size()) == g.dimension(), "point dimension mismatch");
    require(g.profile().relative(x.first(x.size() - 1)) > 0.0, "vbar1^0 is singular at x' = 0'");
    return grad_vbar(g.with_epsilon(0.0), x);
}

/// Leading term coefficient * grad vbar1 with coefficient = B0 rho_n^m(eps) / constant.
inline std::vector<double> leading_gradient(const InclusionPair& g, double blowup_factor,
                                            std::span<const double> x, double leading_constant) {
    require(leading_constant > 0.0, "leading constant must be positive");
    double coef = blowup_factor * rho_n_m(g.epsilon(), g.dimension(), g.profile().order()) / leading_constant;
    std::vector<double> grad = grad_vbar(g, x);
    for (double& v : grad) v *= coef;
    return grad;
}

struct ErrorScales {
    std::optional<double> energy_quadratic; ///< E_n(eps) (curvature case, needs k >= 3)
    double energy_m = 0.0;                  ///< E_n^m(eps)
};

/// E_n(eps) needs C^{k,1} boundaries with k >= 3; E_n^m follows the three branches.
inline ErrorScales error_scales(double eps, int n, double m, std::optional<int> k = std::nullopt) {
    require(eps > 0.0 && eps < 1.0, "error scales need 0 < eps < 1");
    require_admissible(n, m);
    ErrorScales e;
    if (k) {
        require(*k >= 3, "E_n needs k >= 3");
        require(n == 2 || n == 3, "E_n is defined for n = 2, 3");
        double kk = *k;
        e.energy_quadratic = n == 2 ? std::pow(eps, 0.25 - 1.0 / (2.0 * kk))
                                    : std::pow(eps, (kk - 1.0) / (2.0 * kk)) * std::abs(std::log(eps));
    }
    if (n == 2) {
        e.energy_m = std::pow(eps, 1.0 / (4.0 * m));
    } else if (log_branch(n, m)) {
        e.energy_m = std::max(std::pow(eps, 1.0 / (n - 1.0)), std::pow(eps, 0.25) * std::abs(std::log(eps)));
    } else {
        e.energy_m = std::pow(eps, (n - 1.0) / (4.0 * m));
    }
    return e;
}

} // namespace nclab
