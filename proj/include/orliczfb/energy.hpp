#pragma once

// Discrete energy
//   J_eps(v) = sum_e |e|_w G_n(|grad v|_e) + sum_i m_i B_eps(v_i)
// with the regularised nonlinearity g_n(t) = g(t) + t / n, its exact
// gradient and Hessian.  Element gradients are constant; the reaction term
// uses vertex-lumped quadrature, so the three quantities are consistent to
// rounding.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "errors.hpp"
#include "gfunc.hpp"
#include "linalg.hpp"
#include "mesh.hpp"
#include "reaction.hpp"

namespace orliczfb {

inline constexpr double kGradientFloor = 1e-12;

class EnergyModel {
public:
    EnergyModel(const GFunction& gf, const ReactionTerm& rt, const Mesh& mesh, double eps, double reg_n)
        : gf_(gf), rt_(rt), mesh_(mesh), eps_(eps), inv_n_(std::isinf(reg_n) ? 0.0 : 1.0 / reg_n) {
        if (!(eps > 0.0) || !std::isfinite(eps))
            throw DomainError("eps must be positive");
        if (!(reg_n > 0.0))
            throw DomainError("regularisation index n must be positive");
    }

    double eps() const { return eps_; }
    const Mesh& mesh() const { return mesh_; }

    double G_n(double t) const { return gf_.eval_G(t) + 0.5 * inv_n_ * t * t; }
    double g_n(double t) const { return gf_.eval_g(t) + inv_n_ * t; }
    double dg_n(double t) const { return gf_.eval_dg(t) + inv_n_; }
    double F_n(double t) const { return gf_.eval_g(t) / t + inv_n_; }

    double energy(const std::vector<double>& v) const {
        check_size(v);
        double acc = 0.0;
        for (const auto& e : mesh_.elements()) {
            const Point p = mesh_.gradient(e, v);
            acc += e.measure * G_n(std::hypot(p.x, p.y));
        }
        const auto& mass = mesh_.lumped_mass();
        for (std::size_t i = 0; i < v.size(); ++i)
            acc += mass[i] * rt_.B_eps(eps_, v[i]);
        return acc;
    }

    /// Gradient with entries at `fixed` nodes zeroed.
    std::vector<double> gradient(const std::vector<double>& v, const std::vector<char>& fixed) const {
        check_size(v);
        std::vector<double> out(v.size(), 0.0);
        for (const auto& e : mesh_.elements()) {
            const Point p = mesh_.gradient(e, v);
            const double norm = std::hypot(p.x, p.y);
            const double f = F_n(std::max(norm, kGradientFloor));
            const double ax = f * p.x;
            const double ay = f * p.y;
            for (std::size_t k = 0; k < e.count; ++k)
                out[e.nodes[k]] += e.measure * (ax * e.dx[k] + ay * e.dy[k]);
        }
        const auto& mass = mesh_.lumped_mass();
        for (std::size_t i = 0; i < v.size(); ++i) {
            out[i] += mass[i] * rt_.beta_eps(eps_, v[i]);
            if (!fixed.empty() && fixed[i])
                out[i] = 0.0;
        }
        return out;
    }

    /// Hessian into a matrix carrying the mesh pattern; `fixed` rows and
    /// columns are replaced by the identity.
    void hessian(const std::vector<double>& v, const std::vector<char>& fixed, CsrMatrix& h) const {
        check_size(v);
        h.zero();
        for (const auto& e : mesh_.elements()) {
            const Point p = mesh_.gradient(e, v);
            const double norm = std::hypot(p.x, p.y);
            double axx, axy, ayy;
            if (norm >= kGradientFloor) {
                const double f = F_n(norm);
                const double d = dg_n(norm) - f;
                const double nx = p.x / norm;
                const double ny = p.y / norm;
                axx = f + d * nx * nx;
                axy = d * nx * ny;
                ayy = f + d * ny * ny;
            } else if (e.count == 2) {
                axx = ayy = dg_n(kGradientFloor);
                axy = 0.0;
            } else {
                axx = ayy = F_n(kGradientFloor);
                axy = 0.0;
            }
            // Each pair is evaluated once so H is symmetric bit for bit.
            for (std::size_t a = 0; a < e.count; ++a) {
                const double ta = axx * e.dx[a] + axy * e.dy[a];
                const double tb = axy * e.dx[a] + ayy * e.dy[a];
                for (std::size_t b = a; b < e.count; ++b) {
                    const double val = e.measure * (ta * e.dx[b] + tb * e.dy[b]);
                    h.add(e.nodes[a], e.nodes[b], val);
                    if (b != a)
                        h.add(e.nodes[b], e.nodes[a], val);
                }
            }
        }
        const auto& mass = mesh_.lumped_mass();
        for (std::size_t i = 0; i < v.size(); ++i)
            h.diagonal(i) += mass[i] * rt_.dbeta_eps(eps_, v[i]);
        if (!fixed.empty())
            for (std::size_t i = 0; i < v.size(); ++i)
                if (fixed[i])
                    h.pin(i);
    }

    /// Empty matrix with the sparsity pattern of the mesh.
    CsrMatrix pattern() const {
        std::vector<std::vector<std::size_t>> rows(mesh_.node_count());
        for (const auto& e : mesh_.elements())
            for (std::size_t a = 0; a < e.count; ++a)
                for (std::size_t b = 0; b < e.count; ++b)
                    rows[e.nodes[a]].push_back(e.nodes[b]);
        return CsrMatrix(std::move(rows));
    }

private:
    void check_size(const std::vector<double>& v) const {
        if (v.size() != mesh_.node_count())
            throw DomainError("field size does not match the mesh");
    }

    const GFunction& gf_;
    const ReactionTerm& rt_;
    const Mesh& mesh_;
    double eps_;
    double inv_n_;
};

inline std::vector<char> fixed_mask(const DiscreteField& field) {
    const auto values = dirichlet_values(field.domain, field.bc);
    std::vector<char> mask(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        mask[i] = std::isnan(values[i]) ? 0 : 1;
    return mask;
}

inline double assemble_energy(const GFunction& gf, const ReactionTerm& rt, const DiscreteField& field) {
    const Mesh mesh(field.domain);
    return EnergyModel(gf, rt, mesh, field.eps, field.reg_n).energy(field.values);
}

/// Limit energy J_0(v) = sum_e |e|_w G(|grad v|_e) + M |{v > 0}|, the
/// positivity set measured with the lumped vertex weights.  No
/// regularisation.
inline double limit_energy(const GFunction& gf, const ReactionTerm& rt, const DiscreteField& field) {
    const Mesh mesh(field.domain);
    if (field.values.size() != mesh.node_count())
        throw DomainError("field size does not match the mesh");
    double acc = 0.0;
    for (const auto& e : mesh.elements()) {
        const Point p = mesh.gradient(e, field.values);
        acc += e.measure * gf.eval_G(std::hypot(p.x, p.y));
    }
    const auto& mass = mesh.lumped_mass();
    double positive = 0.0;
    for (std::size_t i = 0; i < mass.size(); ++i)
        if (field.values[i] > 0.0)
            positive += mass[i];
    return acc + rt.mass() * positive;
}

inline std::vector<double> assemble_gradient(const GFunction& gf, const ReactionTerm& rt,
                                             const DiscreteField& field) {
    const Mesh mesh(field.domain);
    return EnergyModel(gf, rt, mesh, field.eps, field.reg_n).gradient(field.values, fixed_mask(field));
}

inline CsrMatrix assemble_hessian(const GFunction& gf, const ReactionTerm& rt, const DiscreteField& field) {
    const Mesh mesh(field.domain);
    const EnergyModel model(gf, rt, mesh, field.eps, field.reg_n);
    CsrMatrix h = model.pattern();
    model.hessian(field.values, fixed_mask(field), h);
    return h;
}

} // namespace orliczfb
