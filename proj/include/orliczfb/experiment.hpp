#pragma once

// The full pipeline behind the `run` command: gate on the growth condition,
// sweep eps, verify the final field, write artifacts.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "energy.hpp"
#include "freeboundary.hpp"
#include "gfunc_checks.hpp"
#include "snapshot.hpp"
#include "solver.hpp"

namespace orliczfb {

/// Everything `verify` reports about one field.
struct Verification {
    FreeBoundaryReport report;
    double tau = 0.0;
    double lambda_star = 0.0;
    double h = 0.0;
    /// Mean x of the extracted points; NaN when the free boundary is empty.
    double fb_location = std::numeric_limits<double>::quiet_NaN();
    std::optional<Point> x0;
    Point nu{1.0, 0.0};
    std::vector<std::string> notes;
};

namespace experiment_detail {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Unit direction of increasing u at p, from centred differences of the
/// interpolant.
inline Point ascent_direction(const DiscreteField& field, Point p) {
    const Domain& dom = field.domain;
    const double h = dom.h();
    auto diff = [&](Point step) {
        Point a{p.x - step.x, p.y - step.y};
        Point b{p.x + step.x, p.y + step.y};
        if (!dom.contains(a))
            a = p;
        if (!dom.contains(b))
            b = p;
        return evaluate(dom, field.values, b) - evaluate(dom, field.values, a);
    };
    Point d{diff({h, 0.0}), dom.is_planar() ? diff({0.0, h}) : 0.0};
    const double n = std::hypot(d.x, d.y);
    if (!(n > 0.0))
        return {1.0, 0.0};
    return {d.x / n, d.y / n};
}

inline std::vector<double> default_radii(double h) {
    std::vector<double> out;
    for (double r = 10.0 * h; r < 0.2; r *= 2.0)
        out.push_back(r);
    out.push_back(0.2);
    return out;
}

inline std::string num(double v) { return numerics::format17(v); }

inline std::string point_text(Point p, bool planar) {
    return planar ? num(p.x) + "," + num(p.y) : num(p.x);
}

} // namespace experiment_detail

/// Free-boundary diagnostics of one field.  The slope, sup-gradient and the
/// free boundary itself come from the raw field at level tau; nondegeneracy
/// ratios and the asymptotic residual use the shifted field (u - tau)^+,
/// whose positivity set is {u > tau}.
inline Verification verify_field(const GFunction& gf, const ReactionTerm& rt, const DiscreteField& field,
                                 const VerifyOptions& opts) {
    using experiment_detail::kNaN;
    Verification out;
    out.tau = opts.tau.value_or(field.eps);
    out.lambda_star = gf.inverse_phi(rt.mass());
    out.h = field.domain.h();
    auto& rep = out.report;
    rep.gamma = 1.0;
    rep.fb_points = extract_free_boundary(field, out.tau);
    rep.sup_grad = sup_gradient(field);
    rep.lambda_hat = kNaN;
    rep.asym_residual = kNaN;
    if (rep.fb_points.empty()) {
        out.notes.push_back("free boundary is empty at tau");
        return out;
    }
    double sx = 0.0;
    for (const auto& p : rep.fb_points)
        sx += p.x;
    out.fb_location = sx / static_cast<double>(rep.fb_points.size());
    try {
        rep.lambda_hat = estimate_slope(field, rep.fb_points, opts.band_lo, opts.band_hi);
    } catch (const EmptyBand& e) {
        out.notes.push_back(e.what());
    }

    const Point x0 = rep.fb_points[rep.fb_points.size() / 2];
    out.x0 = x0;
    out.nu = experiment_detail::ascent_direction(field, x0);
    const DiscreteField proxy = limit_proxy(field, out.tau);

    std::vector<double> radii = opts.radii;
    if (radii.empty()) {
        for (double r : experiment_detail::default_radii(out.h)) {
            try {
                (void)nondegeneracy_ratios(proxy, x0, {r});
                radii.push_back(r);
            } catch (const BallOutsideDomain&) {
            }
        }
    }
    try {
        rep.nondeg_ratios = nondegeneracy_ratios(proxy, x0, radii);
    } catch (const BallOutsideDomain& e) {
        out.notes.push_back(e.what());
    }

    std::vector<double> deltas = opts.deltas;
    if (deltas.empty())
        deltas = {2.0 * out.h, 4.0 * out.h, 8.0 * out.h};
    for (double d : deltas)
        rep.band_measures.emplace_back(d, band_measure(field, out.tau, d, opts.R, x0));

    try {
        rep.asym_residual = asymptotic_residual(proxy, x0, out.nu, out.lambda_star, opts.t_max);
    } catch (const std::exception& e) {
        out.notes.push_back(e.what());
    }
    return out;
}

/// key=value block describing a verification.
inline std::string verification_text(const Verification& v, bool planar) {
    using experiment_detail::num;
    const auto& r = v.report;
    std::ostringstream out;
    out << "lambda_star=" << num(v.lambda_star) << "\n";
    out << "tau=" << num(v.tau) << "\n";
    out << "h=" << num(v.h) << "\n";
    out << "fb_count=" << r.fb_points.size() << "\n";
    out << "fb_location=" << num(v.fb_location) << "\n";
    if (v.x0) {
        out << "x0=" << experiment_detail::point_text(*v.x0, planar) << "\n";
        out << "nu=" << experiment_detail::point_text(v.nu, planar) << "\n";
    }
    out << "lambda_hat=" << num(r.lambda_hat) << "\n";
    out << "lambda_rel_error=" << num(std::abs(r.lambda_hat - v.lambda_star) / v.lambda_star) << "\n";
    out << "sup_grad=" << num(r.sup_grad) << "\n";
    out << "asym_residual=" << num(r.asym_residual) << "\n";
    out << "gamma=" << num(r.gamma) << "\n";
    out << "nondeg_count=" << r.nondeg_ratios.size() << "\n";
    out << "band_count=" << r.band_measures.size() << "\n";
    for (std::size_t i = 0; i < v.notes.size(); ++i)
        out << "note" << i << "=" << v.notes[i] << "\n";
    return out.str();
}

inline std::string nondeg_csv(const Verification& v) {
    using experiment_detail::num;
    std::string out = "r,ratio,ratio_over_r\n";
    for (const auto& [r, val] : v.report.nondeg_ratios)
        out += num(r) + "," + num(val) + "," + num(val / r) + "\n";
    return out;
}

/// dim is the dimension of the mesh, not of a radial problem.
inline std::string band_csv(const Verification& v, double R, int dim) {
    using experiment_detail::num;
    std::string out = "delta,measure,measure_over_delta_R\n";
    const double scale = std::pow(R, dim - 1);
    for (const auto& [d, m] : v.report.band_measures)
        out += num(d) + "," + num(m) + "," + num(m / (d * scale)) + "\n";
    return out;
}

/// One line per sweep entry; columns eps,h,energy,iters,sup_grad,lambda_hat,fb_location.
inline std::string sweep_csv(const std::vector<SweepEntry>& entries, const VerifyOptions& opts) {
    using experiment_detail::num;
    std::string out = "eps,h,energy,iters,sup_grad,lambda_hat,fb_location\n";
    for (const auto& e : entries) {
        const auto fb = extract_free_boundary(e.field, opts.tau.value_or(e.eps));
        double slope = experiment_detail::kNaN;
        double loc = experiment_detail::kNaN;
        if (!fb.empty()) {
            try {
                slope = estimate_slope(e.field, fb, opts.band_lo, opts.band_hi);
            } catch (const EmptyBand&) {
            }
            double sx = 0.0;
            for (const auto& p : fb)
                sx += p.x;
            loc = sx / static_cast<double>(fb.size());
        }
        out += num(e.eps) + "," + num(e.field.domain.h()) + "," + num(e.diagnostics.energy) + "," +
               std::to_string(e.diagnostics.iterations) + "," + num(sup_gradient(e.field)) + "," + num(slope) +
               "," + num(loc) + "\n";
    }
    return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
}

/// Creates `dir`, refusing a non-empty existing directory unless `force`.
inline void prepare_output(const std::filesystem::path& dir, bool force) {
    namespace fs = std::filesystem;
    if (fs::exists(dir)) {
        if (!fs::is_directory(dir))
            throw std::runtime_error("output path '" + dir.string() + "' is not a directory");
        if (!fs::is_empty(dir) && !force)
            throw std::runtime_error("output directory '" + dir.string() +
                                     "' is not empty; pass --force to overwrite");
    }
    fs::create_directories(dir);
}

inline std::string snapshot_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "snapshot_%03zu.txt", index);
    return buf;
}

/// Exit codes: 0 success, 2 bad output directory, 3 g fails the growth
/// check, 4 a solve failed.  On failure `failure.txt` records the stage.
inline int run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, bool force,
                          std::ostream& log) {
    using experiment_detail::num;
    try {
        prepare_output(out_dir, force);
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return 2;
    }
    auto fail = [&](const std::string& stage, const std::string& msg, std::optional<std::size_t> index) {
        std::string text = "status=failed\nstage=" + stage + "\n";
        if (index)
            text += "index=" + std::to_string(*index) + "\n";
        text += "message=" + msg + "\n";
        write_file(out_dir / "failure.txt", text);
        log << "error: " << stage << ": " << msg << "\n";
    };

    write_file(out_dir / "config.txt", emit_config(cfg));
    const GFunction gf = cfg.gfunction();
    const ReactionTerm rt = cfg.reaction();

    const auto check = check_lieberman(gf, cfg.check.t_min, cfg.check.t_max, cfg.check.samples);
    write_file(out_dir / "check_g.txt", "passed=" + std::string(check.passed ? "true" : "false") +
                                            "\ndelta=" + num(gf.delta()) + "\ng0=" + num(gf.g0()) +
                                            "\ndelta_hat=" + num(check.growth.delta_hat) +
                                            "\ng0_hat=" + num(check.growth.g0_hat) + "\nworst_margin=" +
                                            num(check.worst_margin) + "\nworst_t=" + num(check.worst_t) +
                                            "\nverified=on grid of " + std::to_string(check.samples_checked) +
                                            " samples\n");
    if (!check.passed) {
        fail("check-g", check.summary, std::nullopt);
        return 3;
    }

    const double lambda_star = gf.inverse_phi(rt.mass());
    write_file(out_dir / "lambda_star.txt", num(lambda_star) + "\n");

    std::vector<SweepEntry> entries;
    try {
        entries = cfg.parallel ? sweep_independent(gf, rt, cfg.domain, cfg.bc, cfg.eps_schedule, cfg.solver,
                                                   thread_budget())
                               : sweep(gf, rt, cfg.domain, cfg.bc, cfg.eps_schedule, cfg.solver);
    } catch (const SweepError& e) {
        fail("solve", e.what(), e.index);
        return 4;
    }

    write_file(out_dir / "sweep.csv", sweep_csv(entries, cfg.verify));
    for (std::size_t k = 0; k < entries.size(); ++k)
        write_file(out_dir / snapshot_name(k), snapshot_text(entries[k].field));

    const auto& last = entries.back();
    const Verification v = verify_field(gf, rt, last.field, cfg.verify);
    std::ostringstream report;
    report << "status=ok\n";
    report << "g=" << cfg.g_expr << "\n";
    report << "beta=" << cfg.beta_expr << "\n";
    report << "mass=" << num(rt.mass()) << "\n";
    report << "eps=" << num(last.eps) << "\n";
    report << "reg_n=" << num(last.field.reg_n) << "\n";
    report << "energy=" << num(last.diagnostics.energy) << "\n";
    report << "iterations=" << last.diagnostics.iterations << "\n";
    report << "final_grad_norm=" << num(last.diagnostics.final_grad_norm) << "\n";
    report << verification_text(v, cfg.domain.is_planar());
    write_file(out_dir / "report.txt", report.str());
    write_file(out_dir / "nondeg.csv", nondeg_csv(v));
    write_file(out_dir / "band.csv", band_csv(v, cfg.verify.R, cfg.domain.is_planar() ? 2 : 1));
    log << report.str();
    return 0;
}

} // namespace orliczfb
