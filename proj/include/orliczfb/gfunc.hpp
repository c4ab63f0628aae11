#pragma once

// Admissible Orlicz nonlinearities g and their calculus.
//
// A GFunction is an immutable expression tree over the builtin families
//   power(p)                 g(t) = t^(p-1)
//   powerlog(a, b, c)        g(t) = t^a log(b t + c)
//   piecewise(c1, a1, a2, s) g(t) = c1 t^a1 (t <= s), c2 t^a2 + d (t > s), C^1 at s
// and the combinators sum, product, compose and scale.  Every node carries
// growth exponents (delta, g0) with delta <= t g'(t) / g(t) <= g0.

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "numerics.hpp"

namespace orliczfb {

namespace gfunc_detail {
struct Node;
}

class GFunction {
public:
    static GFunction power(double p);
    static GFunction power_log(double a, double b, double c);
    static GFunction piecewise_power(double c1, double a1, double a2, double knot);
    static GFunction sum(std::vector<std::pair<double, GFunction>> terms);
    static GFunction product(GFunction lhs, GFunction rhs);
    /// outer(inner(t))
    static GFunction compose(GFunction outer, GFunction inner);
    static GFunction scale(double factor, GFunction inner);
    /// Wraps `inner` with user-declared growth exponents; checkers verify the claim.
    static GFunction with_bounds(double delta, double g0, GFunction inner);

    double g(double t) const { return eval_g(checked(t)); }
    double dg(double t) const { return eval_dg(checked(t)); }
    double G(double t) const { return eval_G(checked(t)); }
    /// F(t) = g(t) / t for t > 0.
    double F(double t) const {
        checked(t);
        if (t == 0.0)
            throw DomainError("F is undefined at t = 0");
        return eval_g(t) / t;
    }
    /// Phi(t) = t g(t) - G(t).
    double phi(double t) const { return eval_phi(checked(t)); }
    /// Phi'(t) = t g'(t).
    double dphi(double t) const {
        checked(t);
        return t == 0.0 ? 0.0 : t * eval_dg(t);
    }
    double inverse_phi(double y) const;
    double inverse_g(double y) const;

    double delta() const;
    double g0() const;
    std::string expression() const;

    // Unchecked evaluation for inner loops; callers guarantee t >= 0.
    double eval_g(double t) const;
    double eval_dg(double t) const;
    double eval_G(double t) const;
    double eval_phi(double t) const;

private:
    explicit GFunction(std::shared_ptr<const gfunc_detail::Node> node) : node_(std::move(node)) {}

    static double checked(double t) {
        if (!std::isfinite(t) || t < 0.0)
            throw DomainError("GFunction evaluated at negative or non-finite argument");
        return t;
    }

    std::shared_ptr<const gfunc_detail::Node> node_;
};

namespace gfunc_detail {

struct Power {
    double p;
};
struct PowerLog {
    double a, b, c;
};
struct PiecewisePower {
    double c1, a1, a2, knot;
    double c2, d; // fixed by C^1 matching at the knot
};
struct Sum {
    std::vector<std::pair<double, GFunction>> terms;
};
struct Product {
    GFunction lhs, rhs;
};
struct Compose {
    GFunction outer, inner;
};
struct Scale {
    double factor;
    GFunction inner;
};
struct Bounds {
    GFunction inner;
};

struct Node {
    std::variant<Power, PowerLog, PiecewisePower, Sum, Product, Compose, Scale, Bounds> kind;
    double delta;
    double g0;
};

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline void require(bool ok, const char* what) {
    if (!ok)
        throw DomainError(what);
}

} // namespace gfunc_detail

inline GFunction GFunction::power(double p) {
    gfunc_detail::require(std::isfinite(p) && p > 1.0, "power(p) requires p > 1");
    return GFunction(std::make_shared<const gfunc_detail::Node>(
        gfunc_detail::Node{gfunc_detail::Power{p}, p - 1.0, p - 1.0}));
}

inline GFunction GFunction::power_log(double a, double b, double c) {
    gfunc_detail::require(std::isfinite(a) && a > 0.0, "powerlog requires a > 0");
    gfunc_detail::require(std::isfinite(b) && b > 0.0, "powerlog requires b > 0");
    gfunc_detail::require(std::isfinite(c) && c >= 1.0, "powerlog requires c >= 1");
    return GFunction(std::make_shared<const gfunc_detail::Node>(
        gfunc_detail::Node{gfunc_detail::PowerLog{a, b, c}, a, a + 1.0}));
}

inline GFunction GFunction::piecewise_power(double c1, double a1, double a2, double knot) {
    gfunc_detail::require(std::isfinite(c1) && c1 > 0.0, "piecewise requires c1 > 0");
    gfunc_detail::require(std::isfinite(a1) && a1 > 0.0, "piecewise requires a1 > 0");
    gfunc_detail::require(std::isfinite(a2) && a2 > 0.0, "piecewise requires a2 > 0");
    gfunc_detail::require(std::isfinite(knot) && knot > 0.0, "piecewise requires knot > 0");
    const double c2 = c1 * a1 * std::pow(knot, a1 - a2) / a2;
    const double d = c1 * std::pow(knot, a1) - c2 * std::pow(knot, a2);
    return GFunction(std::make_shared<const gfunc_detail::Node>(gfunc_detail::Node{
        gfunc_detail::PiecewisePower{c1, a1, a2, knot, c2, d}, std::min(a1, a2), std::max(a1, a2)}));
}

inline GFunction GFunction::sum(std::vector<std::pair<double, GFunction>> terms) {
    gfunc_detail::require(!terms.empty(), "sum requires at least one term");
    double lo = terms.front().second.delta();
    double hi = terms.front().second.g0();
    for (const auto& [w, g] : terms) {
        gfunc_detail::require(std::isfinite(w) && w > 0.0, "sum weights must be positive");
        lo = std::min(lo, g.delta());
        hi = std::max(hi, g.g0());
    }
    return GFunction(std::make_shared<const gfunc_detail::Node>(
        gfunc_detail::Node{gfunc_detail::Sum{std::move(terms)}, lo, hi}));
}

inline GFunction GFunction::product(GFunction lhs, GFunction rhs) {
    const double lo = lhs.delta() + rhs.delta();
    const double hi = lhs.g0() + rhs.g0();
    return GFunction(std::make_shared<const gfunc_detail::Node>(
        gfunc_detail::Node{gfunc_detail::Product{std::move(lhs), std::move(rhs)}, lo, hi}));
}

inline GFunction GFunction::compose(GFunction outer, GFunction inner) {
    const double lo = outer.delta() * inner.delta();
    const double hi = outer.g0() * inner.g0();
    return GFunction(std::make_shared<const gfunc_detail::Node>(
        gfunc_detail::Node{gfunc_detail::Compose{std::move(outer), std::move(inner)}, lo, hi}));
}

inline GFunction GFunction::scale(double factor, GFunction inner) {
    gfunc_detail::require(std::isfinite(factor) && factor > 0.0, "scale factor must be positive");
    const double lo = inner.delta();
    const double hi = inner.g0();
    return GFunction(std::make_shared<const gfunc_detail::Node>(
        gfunc_detail::Node{gfunc_detail::Scale{factor, std::move(inner)}, lo, hi}));
}

inline GFunction GFunction::with_bounds(double delta, double g0, GFunction inner) {
    gfunc_detail::require(std::isfinite(delta) && std::isfinite(g0) && delta > 0.0 && delta <= g0,
                          "bounds require 0 < delta <= g0");
    return GFunction(std::make_shared<const gfunc_detail::Node>(
        gfunc_detail::Node{gfunc_detail::Bounds{std::move(inner)}, delta, g0}));
}

inline double GFunction::delta() const { return node_->delta; }
inline double GFunction::g0() const { return node_->g0; }

inline double GFunction::eval_g(double t) const {
    using namespace gfunc_detail;
    return std::visit(
        overloaded{
            [t](const Power& n) { return n.p == 2.0 ? t : std::pow(t, n.p - 1.0); },
            [t](const PowerLog& n) { return std::pow(t, n.a) * std::log(n.b * t + n.c); },
            [t](const PiecewisePower& n) {
                return t <= n.knot ? n.c1 * std::pow(t, n.a1) : n.c2 * std::pow(t, n.a2) + n.d;
            },
            [t](const Sum& n) {
                double acc = 0.0;
                for (const auto& [w, g] : n.terms)
                    acc += w * g.eval_g(t);
                return acc;
            },
            [t](const Product& n) { return n.lhs.eval_g(t) * n.rhs.eval_g(t); },
            [t](const Compose& n) { return n.outer.eval_g(n.inner.eval_g(t)); },
            [t](const Scale& n) { return n.factor * n.inner.eval_g(t); },
            [t](const Bounds& n) { return n.inner.eval_g(t); },
        },
        node_->kind);
}

inline double GFunction::eval_dg(double t) const {
    using namespace gfunc_detail;
    return std::visit(
        overloaded{
            [t](const Power& n) {
                return n.p == 2.0 ? 1.0 : (n.p - 1.0) * std::pow(t, n.p - 2.0);
            },
            [t](const PowerLog& n) {
                const double lg = std::log(n.b * t + n.c);
                return n.a * std::pow(t, n.a - 1.0) * lg + std::pow(t, n.a) * n.b / (n.b * t + n.c);
            },
            [t](const PiecewisePower& n) {
                return t <= n.knot ? n.c1 * n.a1 * std::pow(t, n.a1 - 1.0)
                                   : n.c2 * n.a2 * std::pow(t, n.a2 - 1.0);
            },
            [t](const Sum& n) {
                double acc = 0.0;
                for (const auto& [w, g] : n.terms)
                    acc += w * g.eval_dg(t);
                return acc;
            },
            [t](const Product& n) {
                return n.lhs.eval_dg(t) * n.rhs.eval_g(t) + n.lhs.eval_g(t) * n.rhs.eval_dg(t);
            },
            [t](const Compose& n) { return n.outer.eval_dg(n.inner.eval_g(t)) * n.inner.eval_dg(t); },
            [t](const Scale& n) { return n.factor * n.inner.eval_dg(t); },
            [t](const Bounds& n) { return n.inner.eval_dg(t); },
        },
        node_->kind);
}

inline double GFunction::eval_G(double t) const {
    using namespace gfunc_detail;
    if (t == 0.0)
        return 0.0;
    auto quadrature = [this, t] {
        return numerics::adaptive_kronrod([this](double s) { return eval_g(s); }, 0.0, t, 1e-10, 40);
    };
    return std::visit(
        overloaded{
            [t](const Power& n) { return std::pow(t, n.p) / n.p; },
            [&](const PowerLog&) { return quadrature(); },
            [t](const PiecewisePower& n) {
                if (t <= n.knot)
                    return n.c1 * std::pow(t, n.a1 + 1.0) / (n.a1 + 1.0);
                const double head = n.c1 * std::pow(n.knot, n.a1 + 1.0) / (n.a1 + 1.0);
                return head +
                       n.c2 * (std::pow(t, n.a2 + 1.0) - std::pow(n.knot, n.a2 + 1.0)) / (n.a2 + 1.0) +
                       n.d * (t - n.knot);
            },
            [t](const Sum& n) {
                double acc = 0.0;
                for (const auto& [w, g] : n.terms)
                    acc += w * g.eval_G(t);
                return acc;
            },
            [&](const Product&) { return quadrature(); },
            [&](const Compose&) { return quadrature(); },
            [t](const Scale& n) { return n.factor * n.inner.eval_G(t); },
            [t](const Bounds& n) { return n.inner.eval_G(t); },
        },
        node_->kind);
}

inline double GFunction::eval_phi(double t) const {
    if (const auto* pw = std::get_if<gfunc_detail::Power>(&node_->kind))
        return (pw->p - 1.0) / pw->p * std::pow(t, pw->p);
    return t * eval_g(t) - eval_G(t);
}

inline double GFunction::inverse_phi(double y) const {
    return numerics::invert_increasing([this](double t) { return eval_phi(t); },
                                       [this](double t) { return t * eval_dg(t); }, y);
}

inline double GFunction::inverse_g(double y) const {
    if (!std::isfinite(y) || y < 0.0)
        throw DomainError("inverse_g requires a finite y >= 0");
    if (const auto* pw = std::get_if<gfunc_detail::Power>(&node_->kind))
        return pw->p == 2.0 ? y : std::pow(y, 1.0 / (pw->p - 1.0));
    if (const auto* sc = std::get_if<gfunc_detail::Scale>(&node_->kind))
        return sc->inner.inverse_g(y / sc->factor);
    if (const auto* bd = std::get_if<gfunc_detail::Bounds>(&node_->kind))
        return bd->inner.inverse_g(y);
    return numerics::invert_increasing([this](double t) { return eval_g(t); },
                                       [this](double t) { return eval_dg(t); }, y);
}

inline std::string GFunction::expression() const {
    using namespace gfunc_detail;
    using numerics::format_shortest;
    return std::visit(
        overloaded{
            [](const Power& n) { return "power(" + format_shortest(n.p) + ")"; },
            [](const PowerLog& n) {
                return "powerlog(" + format_shortest(n.a) + "," + format_shortest(n.b) + "," +
                       format_shortest(n.c) + ")";
            },
            [](const PiecewisePower& n) {
                return "piecewise(" + format_shortest(n.c1) + "," + format_shortest(n.a1) + "," +
                       format_shortest(n.a2) + "," + format_shortest(n.knot) + ")";
            },
            [](const Sum& n) {
                std::string out = "sum(";
                for (std::size_t i = 0; i < n.terms.size(); ++i) {
                    if (i)
                        out += ",";
                    if (n.terms[i].first != 1.0)
                        out += format_shortest(n.terms[i].first) + "*";
                    out += n.terms[i].second.expression();
                }
                return out + ")";
            },
            [](const Product& n) {
                return "product(" + n.lhs.expression() + "," + n.rhs.expression() + ")";
            },
            [](const Compose& n) {
                return "compose(" + n.outer.expression() + "," + n.inner.expression() + ")";
            },
            [](const Scale& n) {
                return "scale(" + format_shortest(n.factor) + "," + n.inner.expression() + ")";
            },
            [this](const Bounds& n) {
                return "bounds(" + format_shortest(delta()) + "," + format_shortest(g0()) + "," +
                       n.inner.expression() + ")";
            },
        },
        node_->kind);
}

} // namespace orliczfb
