#pragma once

// One-dimensional traveling profiles of (F(|w'|) w')' = kappa beta(w) with
// w(0) = 1, w'(0) = alpha.  For s >= 0 the profile is the exact line
// 1 + alpha s.  Below 0 it is integrated backward in the variables
// (w, q = g(w')) with classical RK4; the first integral
//   Phi(w') = Phi(alpha) + kappa (B(w) - M)
// is the accuracy certificate.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "errors.hpp"
#include "gfunc.hpp"
#include "reaction.hpp"

namespace orliczfb {

struct ProfileSample {
    double s;
    double w;
    double p; // w'(s)
};

struct Profile {
    std::vector<ProfileSample> samples; // ascending in s
    double alpha = 0.0;
    double alpha_bar = 0.0;
    double kappa = 1.0;
    double residual_max = 0.0;
    /// Point where w reaches 0 (supercritical alpha only).
    std::optional<double> zero_crossing;
    /// Point where w' vanished and integration stopped (subcritical alpha only).
    std::optional<double> turning_point;
};

/// Phi(w') - Phi(alpha) - kappa (B(w) - M), maximised over samples with 0 <= w <= 1.
inline double first_integral_residual(const Profile& profile, const GFunction& gf,
                                      const ReactionTerm& rt) {
    const double phi_alpha = gf.eval_phi(profile.alpha);
    const double mass = rt.mass();
    double worst = 0.0;
    for (const auto& smp : profile.samples) {
        if (smp.w < 0.0 || smp.w > 1.0)
            continue;
        const double lhs = gf.eval_phi(std::abs(smp.p));
        const double rhs = phi_alpha + profile.kappa * (rt.B(smp.w) - mass);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

namespace profile_detail {

struct State {
    double w;
    double q;
};

class Rhs {
public:
    Rhs(const GFunction& gf, const ReactionTerm& rt, double kappa) : gf_(gf), rt_(rt), kappa_(kappa) {}

    double slope(double q) const { return q >= 0.0 ? gf_.inverse_g(q) : -gf_.inverse_g(-q); }

    State operator()(const State& x) const { return {slope(x.q), kappa_ * rt_.beta(x.w)}; }

    /// One RK4 step of signed size h.
    State step(const State& x, double h) const {
        const State k1 = (*this)(x);
        const State k2 = (*this)({x.w + 0.5 * h * k1.w, x.q + 0.5 * h * k1.q});
        const State k3 = (*this)({x.w + 0.5 * h * k2.w, x.q + 0.5 * h * k2.q});
        const State k4 = (*this)({x.w + h * k3.w, x.q + h * k3.q});
        return {x.w + h / 6.0 * (k1.w + 2.0 * k2.w + 2.0 * k3.w + k4.w),
                x.q + h / 6.0 * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q)};
    }

private:
    const GFunction& gf_;
    const ReactionTerm& rt_;
    double kappa_;
};

/// Largest tau in (0, h] with component(step(x, -tau)) = 0, by bisection.
template <class Component>
double locate_event(const Rhs& rhs, const State& x, double h, Component component) {
    double lo = 0.0;
    double hi = h;
    for (int it = 0; it < 200 && hi - lo > 1e-16 * h; ++it) {
        const double mid = 0.5 * (lo + hi);
        (component(rhs.step(x, -mid)) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace profile_detail

inline Profile integrate_profile(const GFunction& gf, const ReactionTerm& rt, double alpha,
                                 double kappa, double s_min, double step) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw DomainError("profile slope alpha must be positive");
    if (!(kappa >= 1.0) || !std::isfinite(kappa))
        throw DomainError("profile factor kappa must be >= 1");
    if (!(s_min < 0.0) || !std::isfinite(s_min))
        throw DomainError("profile s_min must be negative");
    if (!(step > 0.0) || step > 1e-2)
        throw DomainError("profile step must lie in (0, 1e-2]");

    Profile out;
    out.alpha = alpha;
    out.kappa = kappa;
    const double phi_alpha = gf.eval_phi(alpha);
    const double reduced = phi_alpha - kappa * rt.mass();
    // Differences at rounding level count as the critical case.
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * std::max(phi_alpha, kappa * rt.mass());
    try {
        out.alpha_bar = reduced > noise ? gf.inverse_phi(reduced) : 0.0;
    } catch (const NonConvergence&) {
        throw DomainError("alpha_bar root finding failed");
    }

    const profile_detail::Rhs rhs(gf, rt, kappa);
    std::vector<ProfileSample> back;
    profile_detail::State x{1.0, gf.eval_g(alpha)};
    double s = 0.0;
    back.push_back({s, x.w, alpha});

    while (s > s_min) {
        const double h = std::min(step, s - s_min);
        profile_detail::State next = rhs.step(x, -h);
        if (next.w < 0.0) {
            // Reached w = 0; below it beta vanishes and the profile is linear.
            const double tau = profile_detail::locate_event(rhs, x, h,
                                                            [](const profile_detail::State& y) { return y.w; });
            x = rhs.step(x, -tau);
            s -= tau;
            const double p_bar = rhs.slope(x.q);
            out.zero_crossing = s;
            back.push_back({s, 0.0, p_bar});
            const double s_bar = s;
            for (double t = std::ceil(s_bar / step) - 1.0; t * step >= s_min - 1e-12 * step; t -= 1.0) {
                const double sl = std::max(t * step, s_min);
                back.push_back({sl, p_bar * (sl - s_bar), p_bar});
                if (sl == s_min)
                    break;
            }
            s = s_min;
            break;
        }
        if (next.q <= 0.0) {
            const double tau = profile_detail::locate_event(rhs, x, h,
                                                            [](const profile_detail::State& y) { return y.q; });
            x = rhs.step(x, -tau);
            x.q = 0.0;
            s -= tau;
            out.turning_point = s;
            back.push_back({s, x.w, 0.0});
            break;
        }
        x = next;
        s -= h;
        const double p = rhs.slope(x.q);
        back.push_back({s, x.w, p});
        if (x.w < 1e-12 && std::abs(p - out.alpha_bar) <= 1e-9)
            break;
    }

    out.samples.assign(back.rbegin(), back.rend());
    const auto forward = static_cast<std::size_t>(std::ceil(1.0 / step));
    for (std::size_t i = 1; i <= forward; ++i) {
        const double sf = std::min(static_cast<double>(i) * step, 1.0);
        out.samples.push_back({sf, 1.0 + alpha * sf, alpha});
    }
    out.residual_max = first_integral_residual(out, gf, rt);
    return out;
}

} // namespace orliczfb
