#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "errors.hpp"

namespace orliczfb::numerics {

namespace detail {

// Gauss-Kronrod 7/15 nodes on [-1, 1] (non-negative half) and weights.
inline constexpr double kKronrodNodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd Kronrod nodes (indices 1, 3, 5, 7).
inline constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
double kronrod_step(F& f, double a, double b, double tol, int depth) {
    const double c = 0.5 * (a + b);
    const double r = 0.5 * (b - a);
    double kronrod = 0.0;
    double gauss = 0.0;
    for (int i = 0; i < 7; ++i) {
        const double fs = f(c - r * kKronrodNodes[i]) + f(c + r * kKronrodNodes[i]);
        kronrod += kKronrodWeights[i] * fs;
        if (i % 2 == 1)
            gauss += kGaussWeights[i / 2] * fs;
    }
    const double fc = f(c);
    kronrod += kKronrodWeights[7] * fc;
    gauss += kGaussWeights[3] * fc;
    kronrod *= r;
    gauss *= r;
    if (depth <= 0 || std::abs(kronrod - gauss) <= tol)
        return kronrod;
    return kronrod_step(f, a, c, 0.5 * tol, depth - 1) + kronrod_step(f, c, b, 0.5 * tol, depth - 1);
}

} // namespace detail

/// Adaptive Gauss-Kronrod (G7/K15) quadrature of f over [a, b]; intervals
/// are bisected until the Gauss/Kronrod difference is below their share of
/// abs_tol.
template <class F>
double adaptive_kronrod(F&& f, double a, double b, double abs_tol = 1e-10, int max_depth = 40) {
    if (a == b)
        return 0.0;
    return detail::kronrod_step(f, a, b, abs_tol, max_depth);
}

/// Inverts an increasing function with f(0) = 0 on [0, inf).
///
/// Bracket [0, 1] is doubled until it contains y, then bisected to near machine
/// resolution and polished with safeguarded Newton steps using df.
template <class F, class DF>
double invert_increasing(const F& f, const DF& df, double y, double rel_tol = 1e-12) {
    if (!(y >= 0.0) || !std::isfinite(y))
        throw DomainError("inverse requested for a negative or non-finite value");
    if (y == 0.0)
        return 0.0;
    double lo = 0.0;
    double hi = 1.0;
    while (f(hi) < y) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12)
            throw NonConvergence("inverse bracket exceeded 1e12");
    }
    for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi;
         ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == y)
            return mid;
        (fm < y ? lo : hi) = mid;
    }
    double t = 0.5 * (lo + hi);
    for (int it = 0; it < 4; ++it) {
        const double r = f(t) - y;
        const double d = df(t);
        if (r == 0.0 || !(d > 0.0) || !std::isfinite(d))
            break;
        const double next = t - r / d;
        if (!(next >= lo && next <= hi))
            break;
        t = next;
    }
    const double tol = rel_tol * std::max(1.0, y);
    if (!(std::abs(f(t) - y) <= tol) && !(hi - lo <= 8.0 * std::numeric_limits<double>::epsilon() * hi))
        throw NonConvergence("inverse did not reach tolerance");
    return t;
}

/// Decimal with 17 significant digits; round-trips any double.
inline std::string format17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Shortest decimal that parses back to the same double.
inline std::string format_shortest(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

} // namespace orliczfb::numerics
