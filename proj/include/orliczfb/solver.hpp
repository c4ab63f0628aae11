#pragma once

// Energy minimisation of J_eps by damped Newton with Armijo backtracking,
// and epsilon-continuation sweeps with warm starts.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "energy.hpp"
#include "errors.hpp"
#include "gfunc.hpp"
#include "linalg.hpp"
#include "mesh.hpp"
#include "numerics.hpp"
#include "reaction.hpp"

namespace orliczfb {

struct SolverOptions {
    /// Converged when ||grad||_inf <= tolerance * (1 + |J|).
    double tolerance = 1e-9;
    std::size_t max_iterations = 200;
    /// n = max(reg_min, 1 / eps) unless reg_n is set.
    double reg_min = 10.0;
    std::optional<double> reg_n;
    double cg_rel_tol = 1e-10;
    std::size_t cg_max_factor = 10;
    double armijo_c = 1e-4;
    std::size_t max_backtracks = 60;

    double regularisation(double eps) const { return reg_n ? *reg_n : std::max(reg_min, 1.0 / eps); }
    friend bool operator==(const SolverOptions&, const SolverOptions&) = default;
};

struct SolveDiagnostics {
    std::size_t iterations = 0;
    double final_grad_norm = 0.0;
    double energy = 0.0;
    std::size_t line_search_failures = 0;
    std::size_t cg_iterations_total = 0;
    std::size_t gradient_steps = 0;
    bool clamped = false;
};

struct SolveResult {
    DiscreteField field;
    SolveDiagnostics diagnostics;
};

/// Thrown when Newton exhausts its iteration budget or stalls.
struct SolveError : NonConvergence {
    SolveError(const std::string& what, SolveDiagnostics diag)
        : NonConvergence(what), diagnostics(diag) {}
    SolveDiagnostics diagnostics;
};

/// Thrown by sweeps; `index` is the position in the epsilon schedule.
struct SweepError : std::runtime_error {
    SweepError(std::size_t index, const std::string& what)
        : std::runtime_error("sweep entry " + std::to_string(index) + ": " + what), index(index) {}
    std::size_t index;
};

/// Dirichlet data interpolated into the interior: linear in 1D, an average
/// of the x- and y-blends of the boundary values on rectangles.
inline std::vector<double> initial_guess(const Domain& domain, const BoundaryData& bc) {
    auto value = [](const BoundaryCondition& c) -> std::optional<double> {
        if (const auto* d = std::get_if<Dirichlet>(&c))
            return d->value;
        return std::nullopt;
    };
    auto blend = [](std::optional<double> lo, std::optional<double> hi, double frac) -> std::optional<double> {
        if (lo && hi)
            return (1.0 - frac) * *lo + frac * *hi;
        if (lo)
            return *lo;
        if (hi)
            return *hi;
        return std::nullopt;
    };
    const std::size_t n = domain.node_count();
    std::vector<double> out(n, 0.0);
    if (const auto* r = std::get_if<Rectangle>(&domain.kind())) {
        for (std::size_t j = 0; j < r->ny; ++j)
            for (std::size_t i = 0; i < r->nx; ++i) {
                const double fx = static_cast<double>(i) / static_cast<double>(r->nx - 1);
                const double fy = static_cast<double>(j) / static_cast<double>(r->ny - 1);
                const auto bx = blend(value(bc.left), value(bc.right), fx);
                const auto by = blend(value(bc.bottom), value(bc.top), fy);
                double v = 0.0;
                if (bx && by)
                    v = 0.5 * (*bx + *by);
                else if (bx)
                    v = *bx;
                else if (by)
                    v = *by;
                out[j * r->nx + i] = v;
            }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const double frac = static_cast<double>(i) / static_cast<double>(n - 1);
            out[i] = blend(value(bc.left), value(bc.right), frac).value_or(0.0);
        }
    }
    const auto fixed = dirichlet_values(domain, bc);
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isnan(fixed[i]))
            out[i] = fixed[i];
    return out;
}

namespace solver_detail {

inline double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v)
        m = std::max(m, std::abs(x));
    return m;
}

} // namespace solver_detail

/// Minimises J_eps from `start` (or the Dirichlet interpolant).
inline SolveResult minimize(const GFunction& gf, const ReactionTerm& rt, const Domain& domain,
                            const BoundaryData& bc, double eps, const SolverOptions& opts,
                            const std::vector<double>* start = nullptr) {
    if (!(eps > 0.0) || !std::isfinite(eps))
        throw DomainError("eps must be positive");
    validate_boundary(domain, bc);
    const Mesh mesh(domain);
    const double reg_n = opts.regularisation(eps);
    const EnergyModel model(gf, rt, mesh, eps, reg_n);
    const auto fixed_values = dirichlet_values(domain, bc);
    std::vector<char> fixed(fixed_values.size());
    for (std::size_t i = 0; i < fixed.size(); ++i)
        fixed[i] = std::isnan(fixed_values[i]) ? 0 : 1;

    std::vector<double> v = start ? *start : initial_guess(domain, bc);
    if (v.size() != domain.node_count())
        throw DomainError("warm start size does not match the domain");
    for (std::size_t i = 0; i < v.size(); ++i)
        if (fixed[i])
            v[i] = fixed_values[i];

    SolveDiagnostics diag;
    CsrMatrix hess = model.pattern();
    const std::size_t n = v.size();
    double energy = model.energy(v);
    std::vector<double> grad = model.gradient(v, fixed);
    std::vector<double> dir(n), trial(n);

    auto converged = [&](double e, const std::vector<double>& g) {
        return solver_detail::inf_norm(g) <= opts.tolerance * (1.0 + std::abs(e));
    };

    // Tries v + a * d with Armijo backtracking; on success updates v, energy, grad.
    auto line_search = [&](const std::vector<double>& d) {
        const double slope = dot(grad, d);
        if (!(slope < 0.0))
            return false;
        const double gnorm = solver_detail::inf_norm(grad);
        double a = 1.0;
        for (std::size_t k = 0; k <= opts.max_backtracks; ++k, a *= 0.5) {
            for (std::size_t i = 0; i < n; ++i)
                trial[i] = v[i] + a * d[i];
            const double e_new = model.energy(trial);
            if (!std::isfinite(e_new))
                continue;
            bool accept = e_new <= energy + opts.armijo_c * a * slope;
            std::vector<double> g_new;
            if (!accept && std::abs(e_new - energy) <= 1e-13 * (1.0 + std::abs(energy))) {
                // Energy change is at rounding level; accept on gradient decrease.
                g_new = model.gradient(trial, fixed);
                accept = solver_detail::inf_norm(g_new) < gnorm;
            }
            if (accept) {
                v.swap(trial);
                energy = e_new;
                grad = g_new.empty() ? model.gradient(v, fixed) : std::move(g_new);
                return true;
            }
        }
        return false;
    };

    while (!converged(energy, grad)) {
        if (diag.iterations >= opts.max_iterations) {
            diag.energy = energy;
            diag.final_grad_norm = solver_detail::inf_norm(grad);
            throw SolveError("Newton did not converge in " + std::to_string(opts.max_iterations) +
                                 " iterations (grad_norm=" + numerics::format17(diag.final_grad_norm) + ")",
                             diag);
        }
        ++diag.iterations;
        model.hessian(v, fixed, hess);
        std::vector<double> rhs(n);
        for (std::size_t i = 0; i < n; ++i)
            rhs[i] = -grad[i];
        const CgResult cg = preconditioned_cg(hess, rhs, dir, opts.cg_rel_tol, opts.cg_max_factor * n);
        diag.cg_iterations_total += cg.iterations;

        bool ok = !(cg.negative_curvature && cg.iterations == 0) && line_search(dir);
        if (!ok) {
            ++diag.line_search_failures;
            // Jacobi-scaled steepest descent.
            for (std::size_t i = 0; i < n; ++i) {
                const double d = std::abs(hess.diagonal(i));
                dir[i] = fixed[i] ? 0.0 : -grad[i] / (d > 0.0 ? d : 1.0);
            }
            ++diag.gradient_steps;
            ok = line_search(dir);
        }
        if (!ok) {
            diag.energy = energy;
            diag.final_grad_norm = solver_detail::inf_norm(grad);
            throw SolveError("line search stalled (grad_norm=" + numerics::format17(diag.final_grad_norm) + ")",
                             diag);
        }
    }

    // Projection onto v >= 0, kept only if it neither raises the energy nor
    // breaks convergence.
    if (std::any_of(v.begin(), v.end(), [](double x) { return x < 0.0; })) {
        std::vector<double> clamped = v;
        for (std::size_t i = 0; i < n; ++i)
            if (!fixed[i])
                clamped[i] = std::max(clamped[i], 0.0);
        const double e_c = model.energy(clamped);
        auto g_c = model.gradient(clamped, fixed);
        if (e_c <= energy && converged(e_c, g_c)) {
            v.swap(clamped);
            energy = e_c;
            grad = std::move(g_c);
            diag.clamped = true;
        }
    }

    diag.energy = energy;
    diag.final_grad_norm = solver_detail::inf_norm(grad);
    return {DiscreteField{domain, bc, std::move(v), eps, reg_n}, diag};
}

struct SweepEntry {
    double eps;
    DiscreteField field;
    SolveDiagnostics diagnostics;
};

inline void validate_schedule(const std::vector<double>& schedule) {
    if (schedule.empty())
        throw DomainError("epsilon schedule is empty");
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        if (!(schedule[i] > 0.0) || !std::isfinite(schedule[i]))
            throw DomainError("epsilon schedule entries must be positive");
        if (i > 0 && !(schedule[i] < schedule[i - 1]))
            throw DomainError("epsilon schedule is not strictly decreasing");
    }
}

/// Continuation: each solve is warm-started from the previous solution.
inline std::vector<SweepEntry> sweep(const GFunction& gf, const ReactionTerm& rt, const Domain& domain,
                                     const BoundaryData& bc, const std::vector<double>& schedule,
                                     const SolverOptions& opts) {
    validate_schedule(schedule);
    std::vector<SweepEntry> out;
    out.reserve(schedule.size());
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        try {
            auto res = minimize(gf, rt, domain, bc, schedule[k], opts, k ? &out.back().field.values : nullptr);
            out.push_back({schedule[k], std::move(res.field), res.diagnostics});
        } catch (const std::exception& e) {
            throw SweepError(k, e.what());
        }
    }
    return out;
}

/// Thread cap from ORLICZFB_THREADS (default: hardware concurrency).
inline std::size_t thread_budget() {
    std::size_t n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("ORLICZFB_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap > 0)
            n = std::min<std::size_t>(n, static_cast<std::size_t>(cap));
    }
    return n;
}

/// Solves every schedule entry independently from the Dirichlet interpolant
/// on up to `threads` workers.  Results are stored by index, so the output
/// does not depend on the schedule of the workers.
inline std::vector<SweepEntry> sweep_independent(const GFunction& gf, const ReactionTerm& rt,
                                                 const Domain& domain, const BoundaryData& bc,
                                                 const std::vector<double>& schedule,
                                                 const SolverOptions& opts, std::size_t threads) {
    validate_schedule(schedule);
    std::vector<std::optional<SweepEntry>> slots(schedule.size());
    std::vector<std::exception_ptr> errors(schedule.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < schedule.size(); k = next++) {
            try {
                auto res = minimize(gf, rt, domain, bc, schedule[k], opts);
                slots[k] = SweepEntry{schedule[k], std::move(res.field), res.diagnostics};
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::max<std::size_t>(threads, 1); ++t)
        pool.emplace_back(worker);
    for (auto& th : pool)
        th.join();
    std::vector<SweepEntry> out;
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        if (errors[k]) {
            try {
                std::rethrow_exception(errors[k]);
            } catch (const std::exception& e) {
                throw SweepError(k, e.what());
            }
        }
        out.push_back(std::move(*slots[k]));
    }
    return out;
}

} // namespace orliczfb
