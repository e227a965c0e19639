#pragma once

// Globally adaptive 7/15-point Gauss-Kronrod quadrature. Improper integrals on
// [a, inf) are folded onto a finite interval with the substitution y -> 1/y.

#include "nclab/error.hpp"

#include <array>
#include <cmath>
#include <queue>
#include <string>
#include <vector>

namespace nclab {

struct QuadOptions {
    double rel_tol = 1e-10;
    double abs_tol = 0.0;
    int max_subdivisions = 4000;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    int intervals = 0;
};

namespace detail {

// QUADPACK qk15 abscissae and weights.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gauss_kronrod15(const F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        double dx = half * kXgk[j];
        double sum = f(center - dx) + f(center + dx);
        kronrod += kWgk[j] * sum;
        if (j % 2 == 1) gauss += kWg[j / 2] * sum;
    }
    return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

} // namespace detail

/// Integral of f over [a, b]; throws ErrorKind::Solver if the tolerance is not met
/// within the subdivision budget.
template <class F>
QuadResult integrate(const F& f, double a, double b, const QuadOptions& opt = {}) {
    if (a == b) return {};
    std::priority_queue<detail::Panel> heap;
    detail::Panel first = detail::gauss_kronrod15(f, a, b);
    heap.push(first);
    double total = first.value;
    double err = first.error;
    int n = 1;
    while (err > std::max(opt.abs_tol, opt.rel_tol * std::abs(total))) {
        if (n >= opt.max_subdivisions) {
            fail(ErrorKind::Solver, "quadrature budget exhausted: estimate " + std::to_string(total) +
                                        ", error " + std::to_string(err));
        }
        detail::Panel worst = heap.top();
        heap.pop();
        double mid = 0.5 * (worst.a + worst.b);
        detail::Panel left = detail::gauss_kronrod15(f, worst.a, mid);
        detail::Panel right = detail::gauss_kronrod15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++n;
        if (n % 64 == 0) {
            // re-sum to shed accumulated cancellation error
            auto copy = heap;
            total = 0.0;
            err = 0.0;
            while (!copy.empty()) {
                total += copy.top().value;
                err += copy.top().error;
                copy.pop();
            }
        }
    }
    return {total, err, n};
}

/// Integral of f over [a, inf): [a, a+1] directly, the tail through y -> 1/y.
template <class F>
QuadResult integrate_to_infinity(const F& f, double a, const QuadOptions& opt = {}) {
    const double split = a + 1.0;
    QuadResult head = integrate(f, a, split, opt);
    auto folded = [&f](double t) {
        if (t <= 0.0) return 0.0;
        return f(1.0 / t) / (t * t);
    };
    QuadResult tail = integrate(folded, 0.0, 1.0 / split, opt);
    return {head.value + tail.value, head.error + tail.error, head.intervals + tail.intervals};
}

} // namespace nclab
