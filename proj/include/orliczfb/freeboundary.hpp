#pragma once

// Free-boundary diagnostics on solved fields: level-set extraction, slope
// and gradient bounds, nondegeneracy ratios, band measures around level
// sets and the residual of the linear asymptotic development.

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "mesh.hpp"

namespace orliczfb {

struct FreeBoundaryReport {
    std::vector<Point> fb_points;
    double lambda_hat = 0.0;
    double sup_grad = 0.0;
    std::vector<std::pair<double, double>> nondeg_ratios; // (r, r^-N int_{B_r} u)
    std::vector<std::pair<double, double>> band_measures; // (delta, measure)
    double asym_residual = 0.0;
    double gamma = 1.0;
};

namespace fb_detail {

/// Mesh edges (pairs of node indices) scanned for level crossings.
inline std::vector<std::pair<std::size_t, std::size_t>> edges(const Domain& domain) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    if (const auto* r = std::get_if<Rectangle>(&domain.kind())) {
        for (std::size_t j = 0; j < r->ny; ++j)
            for (std::size_t i = 0; i < r->nx; ++i) {
                const std::size_t a = j * r->nx + i;
                if (i + 1 < r->nx)
                    out.emplace_back(a, a + 1);
                if (j + 1 < r->ny)
                    out.emplace_back(a, a + r->nx);
                if (i + 1 < r->nx && j + 1 < r->ny)
                    out.emplace_back(a, a + r->nx + 1);
            }
    } else {
        for (std::size_t i = 0; i + 1 < domain.node_count(); ++i)
            out.emplace_back(i, i + 1);
    }
    return out;
}

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// True when no node of e carries Dirichlet data.
inline bool interior(const Element& e, const std::vector<double>& dirichlet) {
    for (std::size_t k = 0; k < e.count; ++k)
        if (!std::isnan(dirichlet[e.nodes[k]]))
            return false;
    return true;
}

} // namespace fb_detail

/// Linearly interpolated crossings of u = tau along mesh edges, sorted by
/// (y, x).  Empty when u stays on one side of tau.
inline std::vector<Point> extract_free_boundary(const DiscreteField& field, double tau) {
    std::vector<Point> out;
    const auto& v = field.values;
    for (const auto& [a, b] : fb_detail::edges(field.domain)) {
        if ((v[a] < tau) == (v[b] < tau))
            continue;
        const double w = (tau - v[a]) / (v[b] - v[a]);
        const Point pa = field.domain.node(a);
        const Point pb = field.domain.node(b);
        out.push_back({pa.x + w * (pb.x - pa.x), pa.y + w * (pb.y - pa.y)});
    }
    std::sort(out.begin(), out.end(),
              [](const Point& p, const Point& q) { return std::tie(p.y, p.x) < std::tie(q.y, q.x); });
    return out;
}

/// Median of |grad u| over elements whose mean value lies in
/// [lo_frac, hi_frac] * max u.
inline double estimate_slope(const DiscreteField& field, const std::vector<Point>& fb_points,
                             double lo_frac = 0.3, double hi_frac = 0.7) {
    if (fb_points.empty())
        throw EmptyBand("slope estimate needs a nonempty free boundary");
    if (!(lo_frac > 0.0 && lo_frac < hi_frac && hi_frac < 1.0))
        throw DomainError("slope band requires 0 < lo < hi < 1");
    const Mesh mesh(field.domain);
    const double top = *std::max_element(field.values.begin(), field.values.end());
    std::vector<double> slopes;
    for (const auto& e : mesh.elements()) {
        double mean = 0.0;
        for (std::size_t k = 0; k < e.count; ++k)
            mean += field.values[e.nodes[k]];
        mean /= static_cast<double>(e.count);
        if (mean < lo_frac * top || mean > hi_frac * top)
            continue;
        const Point p = mesh.gradient(e, field.values);
        slopes.push_back(std::hypot(p.x, p.y));
    }
    if (slopes.empty())
        throw EmptyBand("no element has its mean value inside the slope band");
    const std::size_t mid = slopes.size() / 2;
    std::nth_element(slopes.begin(), slopes.begin() + static_cast<std::ptrdiff_t>(mid), slopes.end());
    if (slopes.size() % 2 == 1)
        return slopes[mid];
    const double upper = slopes[mid];
    const double lower = *std::max_element(slopes.begin(), slopes.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

/// Max |grad u| over elements that do not touch a Dirichlet node.
inline double sup_gradient(const DiscreteField& field) {
    const Mesh mesh(field.domain);
    const auto dirichlet = dirichlet_values(field.domain, field.bc);
    double best = 0.0;
    for (const auto& e : mesh.elements()) {
        if (!fb_detail::interior(e, dirichlet))
            continue;
        const Point p = mesh.gradient(e, field.values);
        best = std::max(best, std::hypot(p.x, p.y));
    }
    return best;
}

/// r^-N int_{B_r(x0)} u for each radius.  On 1D meshes the ball is the
/// interval [x0 - r, x0 + r] and N = 1; on rectangles N = 2 and the integral
/// uses a midpoint rule on a sub-grid of spacing h / 8.
inline std::vector<std::pair<double, double>> nondegeneracy_ratios(const DiscreteField& field, Point x0,
                                                                   const std::vector<double>& radii) {
    const Domain& dom = field.domain;
    if (!dom.contains(x0))
        throw BallOutsideDomain("nondegeneracy centre outside the domain");
    std::vector<std::pair<double, double>> out;
    for (double r : radii) {
        if (!(r > 0.0))
            throw DomainError("radii must be positive");
        if (!dom.is_planar()) {
            const Point lo{x0.x - r, 0.0};
            const Point hi{x0.x + r, 0.0};
            if (!dom.contains(lo) || !dom.contains(hi))
                throw BallOutsideDomain("ball of radius " + numerics::format17(r) + " leaves the domain");
            // Exact integral of the piecewise-linear interpolant.
            const double h = dom.hx();
            const double start = dom.node(0).x;
            double acc = 0.0;
            double a = lo.x;
            while (a < hi.x) {
                const double cell = std::floor((a - start) / h);
                double b = std::min(hi.x, start + (cell + 1.0) * h);
                if (b <= a)
                    b = std::min(hi.x, a + h);
                acc += 0.5 * (b - a) * (evaluate(dom, field.values, {a, 0.0}) + evaluate(dom, field.values, {b, 0.0}));
                a = b;
            }
            out.emplace_back(r, acc / r);
        } else {
            const auto& rect = std::get<Rectangle>(dom.kind());
            if (x0.x - r < rect.x_lo - 1e-12 || x0.x + r > rect.x_hi + 1e-12 || x0.y - r < rect.y_lo - 1e-12 ||
                x0.y + r > rect.y_hi + 1e-12)
                throw BallOutsideDomain("ball of radius " + numerics::format17(r) + " leaves the domain");
            const double step = dom.h() / 8.0;
            const auto cells = static_cast<std::size_t>(std::ceil(2.0 * r / step));
            const double d = 2.0 * r / static_cast<double>(cells);
            double acc = 0.0;
            for (std::size_t j = 0; j < cells; ++j)
                for (std::size_t i = 0; i < cells; ++i) {
                    const Point q{x0.x - r + (static_cast<double>(i) + 0.5) * d,
                                  x0.y - r + (static_cast<double>(j) + 0.5) * d};
                    if (fb_detail::distance(q, x0) <= r)
                        acc += d * d * evaluate(dom, field.values, q);
                }
            out.emplace_back(r, acc / (r * r));
        }
    }
    return out;
}

/// Measure of the nodes (dual cells) within distance delta of the
/// lambda_level set and inside B_R(center).
inline double band_measure(const DiscreteField& field, double lambda_level, double delta, double radius,
                           Point center) {
    if (!(delta > 0.0) || !(radius > 0.0))
        throw DomainError("band measure requires delta > 0 and R > 0");
    const auto level = extract_free_boundary(field, lambda_level);
    if (level.empty())
        return 0.0;
    const Mesh mesh(field.domain);
    const auto& cells = mesh.cell_measure();
    double acc = 0.0;
    for (std::size_t i = 0; i < field.values.size(); ++i) {
        const Point p = field.domain.node(i);
        if (fb_detail::distance(p, center) > radius)
            continue;
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& q : level) {
            nearest = std::min(nearest, fb_detail::distance(p, q));
            if (nearest <= delta)
                break;
        }
        if (nearest <= delta)
            acc += cells[i];
    }
    return acc;
}

/// max over t in (5h, t_max] of |u(x0 + t nu) - lambda_star t| / t.
inline double asymptotic_residual(const DiscreteField& field, Point x0, Point nu, double lambda_star,
                                  double t_max) {
    const Domain& dom = field.domain;
    const double norm = std::hypot(nu.x, nu.y);
    if (!(norm > 0.0))
        throw DomainError("direction must be nonzero");
    nu = {nu.x / norm, nu.y / norm};
    const double h = dom.h();
    if (!(t_max > 5.0 * h))
        throw DomainError("t_max must exceed five mesh widths");
    if (!dom.contains({x0.x + t_max * nu.x, x0.y + t_max * nu.y}) || !dom.contains(x0))
        throw RayExitsDomain("ray leaves the domain before t_max");
    double worst = 0.0;
    for (double t = 5.0 * h + h; t <= t_max + 1e-12 * t_max; t += h) {
        const double u = evaluate(dom, field.values, {x0.x + t * nu.x, x0.y + t * nu.y});
        worst = std::max(worst, std::abs(u - lambda_star * t) / t);
    }
    return worst;
}

/// (u - level)^+; the solved field shifted so that {u > level} becomes its
/// positivity set.
inline DiscreteField limit_proxy(const DiscreteField& field, double level) {
    DiscreteField out = field;
    for (auto& x : out.values)
        x = std::max(x - level, 0.0);
    return out;
}

} // namespace orliczfb
