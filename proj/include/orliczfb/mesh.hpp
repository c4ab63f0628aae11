#pragma once

// Domains, boundary data, structured meshes and nodal fields.
//
// Interval and Radial domains are uniform 1D meshes; Radial carries the
// weight r^(N-1) evaluated at element midpoints.  Rectangles use nx * ny
// nodes and two triangles per cell (diagonal from lower-left to upper-right),
// row-major node numbering (index = j * nx + i).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "numerics.hpp"

namespace orliczfb {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct Interval {
    double x_lo, x_hi;
    std::size_t nodes;
};

struct Radial {
    double r_lo, r_hi;
    int dim;
    std::size_t nodes;
};

struct Rectangle {
    double x_lo, x_hi, y_lo, y_hi;
    std::size_t nx, ny;
};

class Domain {
public:
    using Kind = std::variant<Interval, Radial, Rectangle>;

    explicit Domain(Kind kind) : kind_(kind) { validate(); }

    const Kind& kind() const { return kind_; }
    bool is_planar() const { return std::holds_alternative<Rectangle>(kind_); }
    int dimension() const {
        if (const auto* r = std::get_if<Radial>(&kind_))
            return r->dim;
        return is_planar() ? 2 : 1;
    }

    std::size_t node_count() const {
        if (const auto* r = std::get_if<Rectangle>(&kind_))
            return r->nx * r->ny;
        return line_nodes();
    }

    /// Mesh spacing along x (1D coordinate for Interval / Radial).
    double hx() const {
        return std::visit(
            [](const auto& k) -> double {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, Interval>)
                    return (k.x_hi - k.x_lo) / static_cast<double>(k.nodes - 1);
                else if constexpr (std::is_same_v<T, Radial>)
                    return (k.r_hi - k.r_lo) / static_cast<double>(k.nodes - 1);
                else
                    return (k.x_hi - k.x_lo) / static_cast<double>(k.nx - 1);
            },
            kind_);
    }

    double hy() const {
        if (const auto* r = std::get_if<Rectangle>(&kind_))
            return (r->y_hi - r->y_lo) / static_cast<double>(r->ny - 1);
        return 0.0;
    }

    /// Smallest mesh spacing.
    double h() const { return is_planar() ? std::min(hx(), hy()) : hx(); }

    Point node(std::size_t i) const {
        return std::visit(
            [&](const auto& k) -> Point {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, Interval>)
                    return {k.x_lo + static_cast<double>(i) * hx(), 0.0};
                else if constexpr (std::is_same_v<T, Radial>)
                    return {k.r_lo + static_cast<double>(i) * hx(), 0.0};
                else
                    return {k.x_lo + static_cast<double>(i % k.nx) * hx(),
                            k.y_lo + static_cast<double>(i / k.nx) * hy()};
            },
            kind_);
    }

    bool contains(Point p, double slack = 1e-12) const {
        return std::visit(
            [&](const auto& k) -> bool {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, Interval>)
                    return p.x >= k.x_lo - slack && p.x <= k.x_hi + slack;
                else if constexpr (std::is_same_v<T, Radial>)
                    return p.x >= k.r_lo - slack && p.x <= k.r_hi + slack;
                else
                    return p.x >= k.x_lo - slack && p.x <= k.x_hi + slack && p.y >= k.y_lo - slack &&
                           p.y <= k.y_hi + slack;
            },
            kind_);
    }

    /// Text form used on line 2 of solution snapshots.
    std::string descriptor() const {
        using numerics::format17;
        return std::visit(
            [](const auto& k) -> std::string {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, Interval>)
                    return "interval " + format17(k.x_lo) + " " + format17(k.x_hi) + " " +
                           std::to_string(k.nodes);
                else if constexpr (std::is_same_v<T, Radial>)
                    return "radial " + format17(k.r_lo) + " " + format17(k.r_hi) + " " +
                           std::to_string(k.dim) + " " + std::to_string(k.nodes);
                else
                    return "rectangle " + format17(k.x_lo) + " " + format17(k.x_hi) + " " +
                           format17(k.y_lo) + " " + format17(k.y_hi) + " " + std::to_string(k.nx) + " " +
                           std::to_string(k.ny);
            },
            kind_);
    }

    static Domain from_descriptor(const std::string& text) {
        std::istringstream in(text);
        std::string tag;
        in >> tag;
        if (tag == "interval") {
            Interval k{};
            if (in >> k.x_lo >> k.x_hi >> k.nodes)
                return Domain(k);
        } else if (tag == "radial") {
            Radial k{};
            if (in >> k.r_lo >> k.r_hi >> k.dim >> k.nodes)
                return Domain(k);
        } else if (tag == "rectangle") {
            Rectangle k{};
            if (in >> k.x_lo >> k.x_hi >> k.y_lo >> k.y_hi >> k.nx >> k.ny)
                return Domain(k);
        }
        throw DomainError("malformed domain descriptor '" + text + "'");
    }

    friend bool operator==(const Domain& a, const Domain& b) { return a.descriptor() == b.descriptor(); }

private:
    std::size_t line_nodes() const {
        if (const auto* i = std::get_if<Interval>(&kind_))
            return i->nodes;
        return std::get<Radial>(kind_).nodes;
    }

    void validate() const {
        std::visit(
            [](const auto& k) {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, Interval>) {
                    if (!(k.x_lo < k.x_hi) || !std::isfinite(k.x_lo) || !std::isfinite(k.x_hi))
                        throw DomainError("interval bounds must be ordered and finite");
                    if (k.nodes < 2)
                        throw DomainError("interval needs at least 2 nodes");
                } else if constexpr (std::is_same_v<T, Radial>) {
                    if (!(k.r_lo > 0.0) || !(k.r_lo < k.r_hi) || !std::isfinite(k.r_hi))
                        throw DomainError("radial domain requires 0 < r_lo < r_hi");
                    if (k.dim < 2)
                        throw DomainError("radial domain requires dimension >= 2");
                    if (k.nodes < 2)
                        throw DomainError("radial domain needs at least 2 nodes");
                } else {
                    if (!(k.x_lo < k.x_hi) || !(k.y_lo < k.y_hi) || !std::isfinite(k.x_hi) ||
                        !std::isfinite(k.y_hi) || !std::isfinite(k.x_lo) || !std::isfinite(k.y_lo))
                        throw DomainError("rectangle bounds must be ordered and finite");
                    if (k.nx < 3 || k.ny < 3)
                        throw DomainError("rectangle needs at least 3 nodes per axis");
                }
            },
            kind_);
    }

    Kind kind_;
};

struct Dirichlet {
    double value;
    friend bool operator==(const Dirichlet&, const Dirichlet&) = default;
};
struct NaturalZeroFlux {
    friend bool operator==(const NaturalZeroFlux&, const NaturalZeroFlux&) = default;
};
using BoundaryCondition = std::variant<Dirichlet, NaturalZeroFlux>;

/// Boundary pieces.  In 1D `left` is x_lo / r_lo and `right` is x_hi / r_hi;
/// `bottom` and `top` are ignored.
struct BoundaryData {
    BoundaryCondition left = NaturalZeroFlux{};
    BoundaryCondition right = NaturalZeroFlux{};
    BoundaryCondition bottom = NaturalZeroFlux{};
    BoundaryCondition top = NaturalZeroFlux{};
    friend bool operator==(const BoundaryData&, const BoundaryData&) = default;
};

inline void validate_boundary(const Domain& domain, const BoundaryData& bc) {
    std::vector<const BoundaryCondition*> pieces{&bc.left, &bc.right};
    if (domain.is_planar()) {
        pieces.push_back(&bc.bottom);
        pieces.push_back(&bc.top);
    }
    bool any = false;
    for (const auto* p : pieces) {
        if (const auto* d = std::get_if<Dirichlet>(p)) {
            any = true;
            if (!(d->value >= 0.0) || !std::isfinite(d->value))
                throw DomainError("Dirichlet values must be finite and >= 0");
        }
    }
    if (!any)
        throw DomainError("boundary data needs at least one Dirichlet piece");
}

/// Per-node Dirichlet value, NaN for free nodes.  Where two Dirichlet pieces
/// meet at a rectangle corner the left/right value wins.
inline std::vector<double> dirichlet_values(const Domain& domain, const BoundaryData& bc) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> out(domain.node_count(), nan);
    auto value = [](const BoundaryCondition& c) {
        const auto* d = std::get_if<Dirichlet>(&c);
        return d ? d->value : std::numeric_limits<double>::quiet_NaN();
    };
    if (const auto* r = std::get_if<Rectangle>(&domain.kind())) {
        for (std::size_t i = 0; i < r->nx; ++i) {
            out[i] = value(bc.bottom);
            out[(r->ny - 1) * r->nx + i] = value(bc.top);
        }
        for (std::size_t j = 0; j < r->ny; ++j) {
            const std::size_t l = j * r->nx;
            const std::size_t rr = l + r->nx - 1;
            if (!std::isnan(value(bc.left)))
                out[l] = value(bc.left);
            if (!std::isnan(value(bc.right)))
                out[rr] = value(bc.right);
        }
    } else {
        out.front() = value(bc.left);
        out.back() = value(bc.right);
    }
    return out;
}

/// Linear element: 2 nodes (1D) or 3 nodes (triangle) with constant basis
/// gradients and a weighted measure (length * r^(N-1) or area).
struct Element {
    std::array<std::size_t, 3> nodes{};
    std::array<double, 3> dx{};
    std::array<double, 3> dy{};
    std::size_t count = 2;
    double measure = 0.0;
};

class Mesh {
public:
    explicit Mesh(const Domain& domain) : domain_(domain) { build(); }

    const Domain& domain() const { return domain_; }
    const std::vector<Element>& elements() const { return elements_; }
    /// Vertex-lumped mass, sum of measure / node-count over incident elements.
    const std::vector<double>& lumped_mass() const { return lumped_; }
    /// Unweighted dual-cell measure of each node (length or area).
    const std::vector<double>& cell_measure() const { return cells_; }
    std::size_t node_count() const { return domain_.node_count(); }

    /// Gradient of a nodal field on element e.
    Point gradient(const Element& e, const std::vector<double>& v) const {
        Point p;
        for (std::size_t k = 0; k < e.count; ++k) {
            p.x += e.dx[k] * v[e.nodes[k]];
            p.y += e.dy[k] * v[e.nodes[k]];
        }
        return p;
    }

private:
    void build() {
        const std::size_t n = domain_.node_count();
        lumped_.assign(n, 0.0);
        cells_.assign(n, 0.0);
        if (const auto* r = std::get_if<Rectangle>(&domain_.kind())) {
            const double hx = domain_.hx();
            const double hy = domain_.hy();
            const double area = 0.5 * hx * hy;
            for (std::size_t j = 0; j + 1 < r->ny; ++j) {
                for (std::size_t i = 0; i + 1 < r->nx; ++i) {
                    const std::size_t a = j * r->nx + i;
                    const std::size_t b = a + 1;
                    const std::size_t c = a + r->nx;
                    const std::size_t d = c + 1;
                    // lower triangle (a, b, d), upper triangle (a, d, c)
                    Element lower;
                    lower.count = 3;
                    lower.nodes = {a, b, d};
                    lower.dx = {-1.0 / hx, 1.0 / hx, 0.0};
                    lower.dy = {0.0, -1.0 / hy, 1.0 / hy};
                    lower.measure = area;
                    Element upper;
                    upper.count = 3;
                    upper.nodes = {a, d, c};
                    upper.dx = {0.0, 1.0 / hx, -1.0 / hx};
                    upper.dy = {-1.0 / hy, 0.0, 1.0 / hy};
                    upper.measure = area;
                    elements_.push_back(lower);
                    elements_.push_back(upper);
                }
            }
            for (std::size_t j = 0; j < r->ny; ++j)
                for (std::size_t i = 0; i < r->nx; ++i) {
                    const double wx = (i == 0 || i + 1 == r->nx) ? 0.5 : 1.0;
                    const double wy = (j == 0 || j + 1 == r->ny) ? 0.5 : 1.0;
                    cells_[j * r->nx + i] = wx * wy * hx * hy;
                }
        } else {
            const double h = domain_.hx();
            const auto* rad = std::get_if<Radial>(&domain_.kind());
            for (std::size_t i = 0; i + 1 < n; ++i) {
                Element e;
                e.count = 2;
                e.nodes = {i, i + 1, 0};
                e.dx = {-1.0 / h, 1.0 / h, 0.0};
                double weight = 1.0;
                if (rad) {
                    const double mid = rad->r_lo + (static_cast<double>(i) + 0.5) * h;
                    weight = std::pow(mid, rad->dim - 1);
                }
                e.measure = h * weight;
                elements_.push_back(e);
                cells_[i] += 0.5 * h;
                cells_[i + 1] += 0.5 * h;
            }
        }
        for (const auto& e : elements_)
            for (std::size_t k = 0; k < e.count; ++k)
                lumped_[e.nodes[k]] += e.measure / static_cast<double>(e.count);
    }

    Domain domain_;
    std::vector<Element> elements_;
    std::vector<double> lumped_;
    std::vector<double> cells_;
};

/// Nodal solution values together with the data that produced them.
struct DiscreteField {
    Domain domain;
    BoundaryData bc;
    std::vector<double> values;
    double eps = 1.0;
    double reg_n = std::numeric_limits<double>::infinity();
};

/// Piecewise-linear interpolation of a nodal field at p.
inline double evaluate(const Domain& domain, const std::vector<double>& v, Point p) {
    if (!domain.contains(p))
        throw DomainError("evaluation point outside the domain");
    if (const auto* r = std::get_if<Rectangle>(&domain.kind())) {
        const double fx = (p.x - r->x_lo) / domain.hx();
        const double fy = (p.y - r->y_lo) / domain.hy();
        const auto i = std::min<std::size_t>(static_cast<std::size_t>(std::max(0.0, std::floor(fx))), r->nx - 2);
        const auto j = std::min<std::size_t>(static_cast<std::size_t>(std::max(0.0, std::floor(fy))), r->ny - 2);
        const double s = fx - static_cast<double>(i);
        const double t = fy - static_cast<double>(j);
        const std::size_t a = j * r->nx + i;
        const double va = v[a], vb = v[a + 1], vc = v[a + r->nx], vd = v[a + r->nx + 1];
        if (s >= t) // lower triangle (a, b, d)
            return va + s * (vb - va) + t * (vd - vb);
        return va + t * (vc - va) + s * (vd - vc); // upper triangle (a, d, c)
    }
    const double lo = domain.node(0).x;
    const double f = (p.x - lo) / domain.hx();
    const std::size_t n = domain.node_count();
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(std::max(0.0, std::floor(f))), n - 2);
    const double w = f - static_cast<double>(i);
    return (1.0 - w) * v[i] + w * v[i + 1];
}

} // namespace orliczfb
