#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "orliczfb/profile1d.hpp"

using namespace orliczfb;

namespace {

// Critical p = 2 profile with beta = 6 s (1 - s): (w')^2 = 2 B(w) gives
// w' = w sqrt(6 - 4 w), integrated in closed form.
double critical_s_of_w(double w) {
    const double r6 = std::sqrt(6.0);
    const double v = std::sqrt(6.0 - 4.0 * w);
    return (std::log((r6 - v) / (r6 + v)) - std::log((r6 - std::sqrt(2.0)) / (r6 + std::sqrt(2.0)))) / r6;
}

} // namespace

TEST(Profile, CriticalQuadraticMatchesClosedForm) {
    const auto g = GFunction::power(2);
    const auto rt = ReactionTerm::poly_bump(6);
    const auto prof = integrate_profile(g, rt, std::sqrt(2.0), 1.0, -10.0, 1e-3);
    EXPECT_EQ(prof.alpha_bar, 0.0);
    EXPECT_FALSE(prof.zero_crossing.has_value());
    std::size_t checked = 0;
    for (const auto& smp : prof.samples) {
        if (smp.w < 1e-3 || smp.w >= 1.0)
            continue;
        EXPECT_NEAR(smp.s, critical_s_of_w(smp.w), 1e-7) << "w=" << smp.w;
        EXPECT_NEAR(smp.p, smp.w * std::sqrt(6.0 - 4.0 * smp.w), 1e-9);
        ++checked;
    }
    EXPECT_GT(checked, 1000u);
    double min_w = 1.0;
    for (const auto& smp : prof.samples)
        min_w = std::min(min_w, smp.w);
    EXPECT_GT(min_w, 0.0);
    EXPECT_LT(prof.samples.front().p, 1e-5);
}

TEST(Profile, CriticalQuadraticMatchesReducedOde) {
    const auto prof = integrate_profile(GFunction::power(2), ReactionTerm::poly_bump(6), std::sqrt(2.0), 1.0,
                                        -3.0, 1e-3);
    const double ref =
        oracle::rk4([](double, double w) { return w * std::sqrt(6.0 - 4.0 * w); }, 0.0, 1.0, -3.0, 30000);
    EXPECT_DOUBLE_EQ(prof.samples.front().s, -3.0);
    EXPECT_NEAR(prof.samples.front().w, ref, 1e-9);
}

TEST(Profile, SupercriticalQuadraticReachesZero) {
    const auto g = GFunction::power(2);
    const auto rt = ReactionTerm::poly_bump(6);
    const auto prof = integrate_profile(g, rt, 2.0, 1.0, -3.0, 1e-3);
    // Phi(t) = t^2 / 2, so Phi(alpha_bar) = 2 - 1.
    EXPECT_NEAR(prof.alpha_bar, std::sqrt(2.0), 1e-12);
    ASSERT_TRUE(prof.zero_crossing.has_value());
    const double s_bar = *prof.zero_crossing;
    for (const auto& smp : prof.samples) {
        if (smp.s < s_bar) {
            EXPECT_NEAR(smp.w, prof.alpha_bar * (smp.s - s_bar), 1e-6);
        } else if (smp.s == s_bar) {
            EXPECT_NEAR(g.phi(smp.p), g.phi(2.0) - 1.0, 1e-6);
        }
    }
    EXPECT_DOUBLE_EQ(prof.samples.front().s, -3.0);
}

TEST(Profile, LinearAboveOne) {
    for (double alpha : {1.0, std::sqrt(2.0), 2.5}) {
        const auto prof =
            integrate_profile(GFunction::power_log(1, 1, 3), ReactionTerm::poly_bump(6), alpha, 1.0, -2.0, 5e-3);
        for (const auto& smp : prof.samples) {
            if (smp.s >= 0.0) {
                EXPECT_EQ(smp.w, 1.0 + alpha * smp.s);
                EXPECT_EQ(smp.p, alpha);
            }
        }
        EXPECT_DOUBLE_EQ(prof.samples.back().s, 1.0);
    }
}

TEST(Profile, ResidualOfPureRampIsZero) {
    Profile ramp;
    ramp.alpha = 1.3;
    for (double s = 0.0; s <= 1.0; s += 0.1)
        ramp.samples.push_back({s, 1.0 + 1.3 * s, 1.3});
    EXPECT_EQ(first_integral_residual(ramp, GFunction::power(3), ReactionTerm::poly_bump(6)), 0.0);
}

TEST(Profile, FirstIntegralAtFineStep) {
    const auto rt = ReactionTerm::poly_bump(6);
    for (double p : {2.0, 3.0}) {
        const auto g = GFunction::power(p);
        const auto prof = integrate_profile(g, rt, g.inverse_phi(rt.mass()), 1.0, -20.0, 1e-3);
        EXPECT_LE(prof.residual_max, 1e-6) << "p=" << p;
        EXPECT_DOUBLE_EQ(prof.residual_max, first_integral_residual(prof, g, rt));
    }
}

TEST(Profile, FourthOrderConvergence) {
    const auto rt = ReactionTerm::poly_bump(6);
    for (const auto& g : {GFunction::power(2), GFunction::power(3)}) {
        const double alpha = g.inverse_phi(rt.mass());
        for (double step : {1e-2, 1e-3}) {
            const double coarse = integrate_profile(g, rt, alpha, 1.0, -20.0, step).residual_max;
            const double fine = integrate_profile(g, rt, alpha, 1.0, -20.0, step / 2).residual_max;
            EXPECT_GE(coarse / fine, 12.0) << g.expression() << " step=" << step;
        }
    }
}

TEST(Profile, SlopeStaysBetweenAlphaBarAndAlpha) {
    const auto rt = ReactionTerm::poly_bump(6);
    const auto pl = GFunction::power_log(1, 1, 3);
    for (double alpha : {pl.inverse_phi(1.0), pl.inverse_phi(1.0) * 1.3}) {
        const auto prof = integrate_profile(pl, rt, alpha, 1.0, -5.0, 1e-3);
        for (const auto& smp : prof.samples) {
            EXPECT_GE(smp.p, prof.alpha_bar - 1e-9);
            EXPECT_LE(smp.p, alpha + 1e-9);
            if (smp.s < 0.0) {
                EXPECT_LE(smp.w, 1.0);
            }
        }
        for (std::size_t i = 1; i < prof.samples.size(); ++i)
            EXPECT_GE(prof.samples[i].w, prof.samples[i - 1].w);
    }
}

TEST(Profile, BothKappasAreSupported) {
    const auto rt = ReactionTerm::poly_bump(6);
    const auto pl = GFunction::power_log(1, 1, 3);
    const double kappa = pl.g0() / pl.delta();
    const auto crit = integrate_profile(pl, rt, pl.inverse_phi(kappa * rt.mass()), kappa, -20.0, 1e-3);
    EXPECT_EQ(crit.alpha_bar, 0.0);
    EXPECT_LE(crit.residual_max, 1e-6);
    const double alpha = 1.5 * pl.inverse_phi(kappa * rt.mass());
    const auto sup = integrate_profile(pl, rt, alpha, kappa, -3.0, 1e-3);
    EXPECT_NEAR(pl.phi(sup.alpha_bar), pl.phi(alpha) - kappa * rt.mass(), 1e-10);
    ASSERT_TRUE(sup.zero_crossing.has_value());
    const auto at = std::find_if(sup.samples.begin(), sup.samples.end(),
                                 [&](const ProfileSample& s) { return s.s == *sup.zero_crossing; });
    ASSERT_NE(at, sup.samples.end());
    EXPECT_NEAR(pl.phi(at->p), pl.phi(alpha) - kappa * rt.mass(), 1e-6);
}

TEST(Profile, RejectsBadArguments) {
    const auto g = GFunction::power(2);
    const auto rt = ReactionTerm::poly_bump(6);
    EXPECT_THROW(integrate_profile(g, rt, 0.0, 1.0, -1.0, 1e-3), DomainError);
    EXPECT_THROW(integrate_profile(g, rt, 1.0, 0.5, -1.0, 1e-3), DomainError);
    EXPECT_THROW(integrate_profile(g, rt, 1.0, 1.0, 1.0, 1e-3), DomainError);
    EXPECT_THROW(integrate_profile(g, rt, 1.0, 1.0, -1.0, 0.1), DomainError);
}
