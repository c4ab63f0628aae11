#pragma once

// Sampled verification of the structural conditions on g.  The checkers
// differentiate g by finite differences and never call GFunction::dg, so a
// wrong analytic derivative cannot hide a violation.  All results are
// "verified on grid" only.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <utility>

#include "errors.hpp"
#include "gfunc.hpp"

namespace orliczfb {

struct GrowthBounds {
    double delta_hat;
    double g0_hat;
};

struct ConditionReport {
    bool passed = true;
    /// Most negative margin found (>= -slack when passed).
    double worst_margin = std::numeric_limits<double>::infinity();
    double worst_t = 0.0;
    double worst_s = 1.0;
    GrowthBounds growth{0.0, 0.0};
    bool g1_passed = true;
    bool g3_passed = true;
    std::size_t samples_checked = 0;
    std::string summary;
};

namespace checks_detail {

inline void validate_range(double t_min, double t_max, std::size_t samples) {
    if (!(t_min > 0.0) || !(t_max > t_min) || !std::isfinite(t_max) || samples < 2)
        throw DomainError("sampling range requires 0 < t_min < t_max and samples >= 2");
}

inline double geometric_point(double t_min, double t_max, std::size_t i, std::size_t samples) {
    const double frac = static_cast<double>(i) / static_cast<double>(samples - 1);
    return t_min * std::pow(t_max / t_min, frac);
}

/// Central difference of g with relative step 1e-6.
inline double fd_derivative(const GFunction& gf, double t) {
    const double h = 1e-6 * t;
    return (gf.eval_g(t + h) - gf.eval_g(t - h)) / (2.0 * h);
}

} // namespace checks_detail

/// inf / sup of t g'(t) / g(t) on a geometric grid over [t_min, t_max].
inline GrowthBounds estimate_growth_bounds(const GFunction& gf, double t_min, double t_max,
                                           std::size_t samples) {
    checks_detail::validate_range(t_min, t_max, samples);
    GrowthBounds out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = checks_detail::geometric_point(t_min, t_max, i, samples);
        const double ratio = t * checks_detail::fd_derivative(gf, t) / gf.eval_g(t);
        out.delta_hat = std::min(out.delta_hat, ratio);
        out.g0_hat = std::max(out.g0_hat, ratio);
    }
    return out;
}

/// Checks delta <= t g'/g <= g0 against the stored exponents, plus the
/// consequences (g1) and (g3) on random (s, t) pairs in (0, 10]^2.
inline ConditionReport check_lieberman(const GFunction& gf, double t_min, double t_max,
                                       std::size_t samples, std::size_t random_pairs = 10000,
                                       std::uint64_t seed = 20240611) {
    checks_detail::validate_range(t_min, t_max, samples);
    constexpr double slack = 1e-6;
    ConditionReport rep;
    rep.growth = {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    const double delta = gf.delta();
    const double g0 = gf.g0();
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = checks_detail::geometric_point(t_min, t_max, i, samples);
        const double ratio = t * checks_detail::fd_derivative(gf, t) / gf.eval_g(t);
        rep.growth.delta_hat = std::min(rep.growth.delta_hat, ratio);
        rep.growth.g0_hat = std::max(rep.growth.g0_hat, ratio);
        const double margin = std::min(ratio - delta, g0 - ratio);
        if (margin < rep.worst_margin) {
            rep.worst_margin = margin;
            rep.worst_t = t;
        }
    }
    rep.samples_checked = samples;
    if (rep.worst_margin < -slack)
        rep.passed = false;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto draw = [&] { return 10.0 * (1.0 - unit(rng)); }; // (0, 10]
    for (std::size_t k = 0; k < random_pairs; ++k) {
        const double s = draw();
        const double t = draw();
        const double gt = gf.eval_g(t);
        const double gst = gf.eval_g(s * t);
        const double lo = std::min(std::pow(s, delta), std::pow(s, g0)) * gt;
        const double hi = std::max(std::pow(s, delta), std::pow(s, g0)) * gt;
        const double tol1 = 1e-9 * std::max({1.0, std::abs(gst), hi});
        if (gst < lo - tol1 || gst > hi + tol1)
            rep.g1_passed = false;

        const double big_g = gf.eval_G(t);
        const double tg = t * gt;
        const double tol3 = 1e-9 * std::max(1.0, tg) + 1e-10;
        if (big_g < tg / (1.0 + g0) - tol3 || big_g > tg + tol3)
            rep.g3_passed = false;
    }
    rep.samples_checked += random_pairs;
    rep.passed = rep.passed && rep.g1_passed && rep.g3_passed;
    rep.summary = std::string(rep.passed ? "pass" : "fail") + ": delta_hat=" +
                  numerics::format17(rep.growth.delta_hat) +
                  " g0_hat=" + numerics::format17(rep.growth.g0_hat) +
                  " declared=(" + numerics::format17(delta) + "," + numerics::format17(g0) + ")" +
                  (rep.g1_passed ? "" : " g1-violated") + (rep.g3_passed ? "" : " g3-violated");
    return rep;
}

/// Checks g'(t) <= s^2 g'(ts) for s in [1, 1 + eta0] and
/// t in (0, Phi^{-1}((g0 / delta) M)].  Margins are relative to g'(t).
inline ConditionReport check_derivative_condition(const GFunction& gf, double eta0, double mass,
                                                  std::size_t samples) {
    if (!(eta0 > 0.0) || eta0 > 1.0)
        throw DomainError("eta0 must lie in (0, 1]");
    if (!(mass > 0.0) || !std::isfinite(mass))
        throw DomainError("mass must be positive");
    if (samples < 2)
        throw DomainError("samples must be >= 2");
    constexpr double slack = 1e-9;
    const double t_top = gf.inverse_phi(gf.g0() / gf.delta() * mass);
    const double t_bottom = 1e-6 * t_top;
    const std::size_t s_samples = std::max<std::size_t>(samples / 4, 2);

    ConditionReport rep;
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = checks_detail::geometric_point(t_bottom, t_top, i, samples);
        const double base = checks_detail::fd_derivative(gf, t);
        for (std::size_t j = 0; j < s_samples; ++j) {
            const double s = 1.0 + eta0 * static_cast<double>(j) / static_cast<double>(s_samples - 1);
            const double margin = (s * s * checks_detail::fd_derivative(gf, t * s) - base) /
                                  std::max(std::abs(base), 1e-300);
            if (margin < rep.worst_margin) {
                rep.worst_margin = margin;
                rep.worst_t = t;
                rep.worst_s = s;
            }
            ++rep.samples_checked;
        }
    }
    rep.passed = rep.worst_margin >= -slack;
    rep.summary = std::string(rep.passed ? "pass" : "fail") +
                  ": worst_margin=" + numerics::format17(rep.worst_margin) +
                  " at t=" + numerics::format17(rep.worst_t) + " s=" + numerics::format17(rep.worst_s);
    return rep;
}

} // namespace orliczfb
