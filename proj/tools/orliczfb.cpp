// Command-line front end: check-g, profile, solve, sweep, verify, run.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "orliczfb/config.hpp"
#include "orliczfb/experiment.hpp"
#include "orliczfb/gfunc_checks.hpp"
#include "orliczfb/profile1d.hpp"
#include "orliczfb/snapshot.hpp"

namespace fs = std::filesystem;
using namespace orliczfb;

namespace {

std::string num(double v) { return numerics::format17(v); }

struct Common {
    std::string config;
    std::string out;
    bool force = false;
    bool parallel = false;
};

ExperimentConfig load(const Common& c) {
    if (c.config.empty())
        throw std::runtime_error("--config is required");
    auto cfg = parse_config(c.config);
    if (c.parallel)
        cfg.parallel = true;
    return cfg;
}

fs::path out_dir(const Common& c, const ExperimentConfig& cfg) {
    if (!c.out.empty())
        return c.out;
    return cfg.output_dir;
}

int cmd_check_g(const Common& c, std::string g_text, double eta0, std::optional<double> mass) {
    CheckOptions opts;
    std::optional<ExperimentConfig> cfg;
    if (!c.config.empty()) {
        cfg = load(c);
        opts = cfg->check;
        if (g_text.empty())
            g_text = cfg->g_expr;
        if (!mass)
            mass = cfg->reaction().mass();
    }
    if (g_text.empty())
        throw std::runtime_error("give --g or --config");
    const GFunction gf = parse_gfunction(g_text);
    const auto rep = check_lieberman(gf, opts.t_min, opts.t_max, opts.samples);
    std::cout << "g=" << gf.expression() << "\n";
    std::cout << "delta=" << num(gf.delta()) << "\ng0=" << num(gf.g0()) << "\n";
    std::cout << "delta_hat=" << num(rep.growth.delta_hat) << "\ng0_hat=" << num(rep.growth.g0_hat) << "\n";
    std::cout << "lieberman=" << (rep.passed ? "pass" : "fail") << "\n";
    std::cout << "g1=" << (rep.g1_passed ? "pass" : "fail") << "\ng3=" << (rep.g3_passed ? "pass" : "fail") << "\n";
    std::cout << "worst_margin=" << num(rep.worst_margin) << "\nworst_t=" << num(rep.worst_t) << "\n";
    std::cout << "verified=on grid of " << rep.samples_checked << " samples\n";
    bool ok = rep.passed;
    if (mass) {
        const auto d = check_derivative_condition(gf, eta0, *mass, opts.samples);
        std::cout << "derivative_condition=" << (d.passed ? "pass" : "fail") << "\n";
        std::cout << "derivative_worst_margin=" << num(d.worst_margin) << "\n";
        ok = ok && d.passed;
    }
    if (!rep.passed)
        std::cout << "summary=" << rep.summary << "\n";
    return ok ? 0 : 1;
}

int cmd_profile(const Common& c, std::string g_text, std::string beta_text, std::optional<double> alpha,
                double kappa, double s_min, double step) {
    fs::path base;
    if (!c.config.empty()) {
        const auto cfg = load(c);
        if (g_text.empty())
            g_text = cfg.g_expr;
        if (beta_text.empty())
            beta_text = cfg.beta_expr;
        base = cfg.base_dir;
    }
    if (g_text.empty() || beta_text.empty())
        throw std::runtime_error("give --g and --beta, or --config");
    const GFunction gf = parse_gfunction(g_text);
    const ReactionTerm rt = parse_reaction(beta_text, base);
    const double a = alpha.value_or(gf.inverse_phi(kappa * rt.mass()));
    const Profile prof = integrate_profile(gf, rt, a, kappa, s_min, step);

    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!c.out.empty()) {
        file.open(c.out, std::ios::binary);
        if (!file)
            throw std::runtime_error("cannot write '" + c.out + "'");
        os = &file;
    }
    *os << "s,w,wprime\n";
    for (const auto& smp : prof.samples)
        *os << num(smp.s) << "," << num(smp.w) << "," << num(smp.p) << "\n";
    *os << "# alpha=" << num(prof.alpha) << " alpha_bar=" << num(prof.alpha_bar) << " kappa=" << num(prof.kappa)
        << " residual_max=" << num(prof.residual_max);
    if (prof.zero_crossing)
        *os << " zero_crossing=" << num(*prof.zero_crossing);
    *os << "\n";
    if (!c.out.empty())
        std::cout << "alpha_bar=" << num(prof.alpha_bar) << " residual_max=" << num(prof.residual_max) << "\n";
    return 0;
}

int cmd_solve(const Common& c, std::optional<double> eps) {
    const auto cfg = load(c);
    const fs::path dir = out_dir(c, cfg);
    prepare_output(dir, c.force);
    const double e = eps.value_or(cfg.eps_schedule.back());
    const auto res = minimize(cfg.gfunction(), cfg.reaction(), cfg.domain, cfg.bc, e, cfg.solver);
    write_file(dir / "snapshot.txt", snapshot_text(res.field));
    const auto& d = res.diagnostics;
    std::ostringstream text;
    text << "eps=" << num(e) << "\nreg_n=" << num(res.field.reg_n) << "\niterations=" << d.iterations
         << "\nenergy=" << num(d.energy) << "\nfinal_grad_norm=" << num(d.final_grad_norm)
         << "\nline_search_failures=" << d.line_search_failures << "\ncg_iterations_total=" << d.cg_iterations_total
         << "\ngradient_steps=" << d.gradient_steps << "\n";
    write_file(dir / "diagnostics.txt", text.str());
    std::cout << text.str();
    return 0;
}

int cmd_sweep(const Common& c) {
    const auto cfg = load(c);
    const fs::path dir = out_dir(c, cfg);
    prepare_output(dir, c.force);
    const GFunction gf = cfg.gfunction();
    const ReactionTerm rt = cfg.reaction();
    const auto entries = cfg.parallel ? sweep_independent(gf, rt, cfg.domain, cfg.bc, cfg.eps_schedule,
                                                          cfg.solver, thread_budget())
                                      : sweep(gf, rt, cfg.domain, cfg.bc, cfg.eps_schedule, cfg.solver);
    const std::string table = sweep_csv(entries, cfg.verify);
    write_file(dir / "sweep.csv", table);
    for (std::size_t k = 0; k < entries.size(); ++k)
        write_file(dir / snapshot_name(k), snapshot_text(entries[k].field));
    std::cout << table;
    return 0;
}

int cmd_verify(const Common& c, const std::string& snapshot) {
    const auto cfg = load(c);
    const DiscreteField field = read_snapshot(snapshot, cfg.bc);
    const auto v = verify_field(cfg.gfunction(), cfg.reaction(), field, cfg.verify);
    const std::string report = verification_text(v, field.domain.is_planar());
    std::cout << report;
    if (!c.out.empty()) {
        prepare_output(c.out, c.force);
        write_file(fs::path(c.out) / "verify.txt", report);
        write_file(fs::path(c.out) / "nondeg.csv", nondeg_csv(v));
        write_file(fs::path(c.out) / "band.csv", band_csv(v, cfg.verify.R, field.domain.is_planar() ? 2 : 1));
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Singular perturbation free-boundary laboratory"};
    app.require_subcommand(1);
    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config, "Experiment config file");
        sub->add_option("--out", common.out, "Output directory (file for profile)");
        sub->add_flag("--force", common.force, "Overwrite a non-empty output directory");
        sub->add_flag("--parallel", common.parallel, "Solve sweep entries concurrently");
    };

    std::string g_text, beta_text, snapshot;
    double eta0 = 0.5;
    std::optional<double> mass, alpha, eps;
    double kappa = 1.0;
    double s_min = -20.0;
    double step = 1e-3;

    auto* check = app.add_subcommand("check-g", "Sampled check of the growth condition on g");
    add_common(check);
    check->add_option("--g", g_text, "g expression");
    check->add_option("--eta0", eta0, "eta0 for the derivative condition");
    check->add_option("--mass", mass, "M for the derivative condition");

    auto* profile = app.add_subcommand("profile", "Integrate the 1D traveling profile");
    add_common(profile);
    profile->add_option("--g", g_text, "g expression");
    profile->add_option("--beta", beta_text, "beta expression");
    profile->add_option("--alpha", alpha, "Slope at w = 1 (default Phi^-1(kappa M))");
    profile->add_option("--kappa", kappa, "Right-hand side factor");
    profile->add_option("--s-min", s_min, "Left end of the integration");
    profile->add_option("--step", step, "RK4 step");

    auto* solve = app.add_subcommand("solve", "Minimise J_eps for one eps");
    add_common(solve);
    solve->add_option("--eps", eps, "eps (default: last schedule entry)");

    auto* sweep_cmd = app.add_subcommand("sweep", "Continuation over the eps schedule");
    add_common(sweep_cmd);

    auto* verify = app.add_subcommand("verify", "Free-boundary diagnostics of a snapshot");
    add_common(verify);
    verify->add_option("--snapshot", snapshot, "Snapshot file")->required();

    auto* run = app.add_subcommand("run", "check-g, sweep and verify with all artifacts");
    add_common(run);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*check)
            return cmd_check_g(common, g_text, eta0, mass);
        if (*profile)
            return cmd_profile(common, g_text, beta_text, alpha, kappa, s_min, step);
        if (*solve)
            return cmd_solve(common, eps);
        if (*sweep_cmd)
            return cmd_sweep(common);
        if (*verify)
            return cmd_verify(common, snapshot);
        if (*run) {
            const auto cfg = load(common);
            return run_experiment(cfg, out_dir(common, cfg), common.force, std::cout);
        }
    } catch (const ValidationError& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
