#include "risac/ao.hpp"
#include "risac/sdr.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace risac;

namespace {

RobustProblem make(ScenarioConfig cfg, std::uint64_t seed) {
    Rng rng(seed);
    return make_problem(cfg, sample_realization(cfg, rng));
}

ScenarioConfig small_config(int n, int m) {
    ScenarioConfig cfg;
    cfg.n_tx = n;
    cfg.n_ris = m;
    return cfg;
}

VecC unit_phases(int m, Rng& rng) {
    VecC t(m);
    for (int i = 0; i < m; ++i) t(i) = std::exp(kJ * 2.0 * kPi * rng.uniform());
    return t;
}

}  // namespace

TEST(TransmitSdp, SingleUserMrtClosedForm) {
    for (std::uint64_t seed : {1, 2, 3}) {
        ScenarioConfig cfg = small_config(4, 3);
        cfg.n_users = 1;
        cfg.n_targets = 0;
        cfg.err_bu = cfg.err_bru = cfg.err_rc = 0.0;
        const RobustProblem prob = make(cfg, seed);
        Rng rng(seed);
        const VecC th = unit_phases(3, rng);
        const auto res = solve_transmit(prob, th, rng);
        ASSERT_EQ(res.status, TransmitStatus::ok);
        EXPECT_TRUE(res.rank_one);
        const RowC c = prob.real.effective_channel(0, th);
        const double expect = (std::pow(2.0, cfg.rate_threshold_bps_hz) - 1) * prob.real.sigma2_com[0] / c.squaredNorm();
        EXPECT_NEAR(res.sdr_power, expect, 1e-6 * expect);
        EXPECT_NEAR(res.s_tx.squaredNorm(), expect, 1e-6 * expect);
    }
}

TEST(TransmitSdp, PaperScaleRankOneAndFeasible) {
    int rank_one = 0;
    const int seeds = 5;
    for (int s = 0; s < seeds; ++s) {
        const RobustProblem prob = make(ScenarioConfig{}, 100 + s);
        Rng rng(s);
        const VecC th = random_discrete_theta(prob.n_ris(), 4, rng);
        const auto res = solve_transmit(prob, th, rng);
        ASSERT_EQ(res.status, TransmitStatus::ok);
        EXPECT_EQ(res.solver, SolveStatus::optimal);
        rank_one += res.rank_one;
        EXPECT_LE(res.sdr_power, res.s_tx.squaredNorm() * (1 + 1e-6));
        EXPECT_TRUE(satisfies_constraints(prob, res.s_tx, th));
    }
    EXPECT_GE(rank_one, 0.9 * seeds);
}

TEST(TransmitSdp, RobustPowerExceedsNominal) {
    for (std::uint64_t seed : {4, 5}) {
        ScenarioConfig robust = small_config(6, 4);
        ScenarioConfig nominal = robust;
        nominal.err_bu = nominal.err_bru = nominal.err_rc = 0.0;
        const RobustProblem pr = make(robust, seed), pn = make(nominal, seed);
        Rng rng(seed);
        const VecC th = unit_phases(4, rng);
        Rng r1(1), r2(1);
        const auto a = solve_transmit(pr, th, r1);
        const auto b = solve_transmit(pn, th, r2);
        ASSERT_EQ(a.status, TransmitStatus::ok);
        ASSERT_EQ(b.status, TransmitStatus::ok);
        EXPECT_LE(b.sdr_power, a.sdr_power * (1 + 1e-6));
    }
}

TEST(TransmitSdp, InfeasibleSensingIsTyped) {
    ScenarioConfig cfg = small_config(4, 2);
    cfg.err_rc = 50.0;
    const RobustProblem prob = make(cfg, 7);
    const auto sdp = build_transmit_sdp(prob, VecC::Ones(2));
    EXPECT_TRUE(sdp.sensing_infeasible);
    Rng rng(1);
    EXPECT_EQ(solve_transmit(prob, VecC::Ones(2), rng).status, TransmitStatus::infeasible);
}

TEST(FeasibilityScale, MakesRandomBeamsFeasible) {
    const RobustProblem prob = make(small_config(6, 4), 8);
    Rng rng(8);
    int scaled = 0;
    for (int t = 0; t < 20; ++t) {
        const MatC s = rng.cscg_matrix(6, 2);
        const VecC th = unit_phases(4, rng);
        const auto c2 = feasibility_scale(prob, s, th);
        if (!c2) continue;
        ++scaled;
        const MatC s2 = std::sqrt(*c2) * s;
        EXPECT_TRUE(satisfies_constraints(prob, s2, th));
        EXPECT_FALSE(satisfies_constraints(prob, std::sqrt(*c2 * 0.99) * s, th));
    }
    EXPECT_GT(scaled, 0);
}

TEST(RisBlocks, LiftingIdentity) {
    const RobustProblem prob = make(small_config(4, 5), 9);
    Rng rng(9);
    for (int t = 0; t < 20; ++t) {
        const MatC s = rng.cscg_matrix(4, 2);
        const VecC th = unit_phases(5, rng);
        const auto b = ris_blocks(prob, s);
        const MatC l = lift(th);
        for (int k = 0; k < 2; ++k) {
            EXPECT_NEAR((b.g_bar[k] - b.g_bar[k].adjoint()).norm(), 0.0, 1e-12 * (1 + b.g_bar[k].norm()));
            EXPECT_EQ(b.g_bar[k](5, 5), 0.0);
            const RowC c = prob.real.effective_channel(k, th);
            const MatC psi = psi_matrix(s, k, prob.thr.rate_bps_hz[k]);
            const double direct = (c * psi * c.adjoint())(0).real();
            const double lifted = (b.g_bar[k] * l).trace().real() + b.nominal_const[k];
            EXPECT_NEAR(lifted, direct, 1e-10 * (1 + std::abs(direct)));
            const double direct_n = (c * psi).squaredNorm();
            const double lifted_n = (b.g_tilde[k] * l).trace().real() + b.norm_const[k];
            EXPECT_NEAR(lifted_n, direct_n, 1e-10 * (1 + direct_n));
        }
    }
}

TEST(RisSdp, TangentMarginExactAtReference) {
    const RobustProblem prob = make(small_config(4, 4), 10);
    Rng rng(10);
    const MatC s = rng.cscg_matrix(4, 2) * 1e-1;
    const VecC th = unit_phases(4, rng);
    const RisSdp sdp = build_ris_sdp(prob, s, th);
    for (int k = 0; k < 2; ++k) {
        const double m = comm_margin(prob, s, th, k) / prob.real.sigma2_com[k];
        EXPECT_NEAR(ris_sdp_margin(sdp, k, lift(th)), m, 1e-8 * (1 + std::abs(m)));
    }
    // away from the reference the tangent under-estimates the margin
    for (int t = 0; t < 20; ++t) {
        const VecC other = unit_phases(4, rng);
        for (int k = 0; k < 2; ++k)
            EXPECT_LE(ris_sdp_margin(sdp, k, lift(other)),
                      comm_margin(prob, s, other, k) / prob.real.sigma2_com[k] + 1e-9);
    }
}

TEST(RisSdp, SingleElementDominatesGrid) {
    for (std::uint64_t seed : {11, 12, 13}) {
        const RobustProblem prob = make(small_config(4, 1), seed);
        Rng rng(seed);
        const VecC th = VecC::Constant(1, std::exp(kJ * 0.3));
        const auto tx = solve_transmit(prob, th, rng);
        ASSERT_EQ(tx.status, TransmitStatus::ok);
        const RisSdp sdp = build_ris_sdp(prob, tx.s_tx, th);
        const auto res = solve_ris_sdp(sdp);
        ASSERT_EQ(res.status, SolveStatus::optimal);
        double best = -std::numeric_limits<double>::infinity();
        for (int i = 0; i <= 721; ++i) {
            // the reference point is feasible by construction, so it joins the grid
            const double w_arg = i == 721 ? 0.3 : 2 * kPi * i / 720;
            const VecC w = VecC::Constant(1, std::exp(kJ * w_arg));
            double sum = 0;
            bool ok = true;
            for (int k = 0; k < prob.n_users(); ++k) {
                const double mk = ris_sdp_margin(sdp, k, lift(w));
                ok = ok && mk >= 0;
                sum += mk;
            }
            if (ok) best = std::max(best, sum);
        }
        ASSERT_TRUE(std::isfinite(best));
        EXPECT_GE(res.bound, best - 1e-6 * (1 + std::abs(best)));
        for (int i = 0; i < 2; ++i) EXPECT_NEAR(res.theta_bar(i, i).real(), 1.0, 1e-9);
    }
}

TEST(RisSdp, ZeroBeamMarginsIgnoreTheta) {
    const RobustProblem prob = make(small_config(4, 3), 14);
    const RisSdp sdp = build_ris_sdp(prob, MatC::Zero(4, 2), VecC::Ones(3));
    Rng rng(14);
    const double base = ris_sdp_margin(sdp, 0, lift(VecC::Ones(3)));
    EXPECT_NEAR(base, -1.0, 1e-12);
    for (int t = 0; t < 5; ++t) EXPECT_NEAR(ris_sdp_margin(sdp, 0, lift(unit_phases(3, rng))), base, 1e-12);
}

TEST(MapToDiscrete, HandCases) {
    const double q = kPi / 4;
    auto one = [](cdouble z, int d) { return map_to_discrete(VecC::Constant(1, z), d)(0); };
    EXPECT_NEAR(std::abs(one(std::exp(kJ * q), 4) - std::exp(kJ * q)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(one(1.0, 4) - std::exp(kJ * q)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(one(std::exp(kJ * 0.1), 4) - std::exp(kJ * q)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(one(std::exp(-kJ * 0.1), 4) - std::exp(-kJ * q)), 0.0, 1e-15);
}

TEST(MapToDiscrete, IdempotentAndInAlphabet) {
    Rng rng(15);
    for (int d : {2, 3, 4, 8, 16}) {
        const VecC t = unit_phases(20, rng);
        const VecC m1 = map_to_discrete(t, d);
        EXPECT_EQ(map_to_discrete(m1, d), m1);
        for (int i = 0; i < 20; ++i) {
            const double k = (std::arg(m1(i)) - kPi / d) * d / (2 * kPi);
            EXPECT_NEAR(k, std::round(k), 1e-9);
            EXPECT_NEAR(std::abs(m1(i)), 1.0, 1e-15);
        }
    }
}

TEST(Randomization, RankOneRecoversTheta) {
    Rng rng(16);
    const VecC th = unit_phases(5, rng);
    const MatC tb = lift(th);
    int calls = 0;
    const auto res = gaussian_randomization(tb, 20,
                                            [&](const VecC& c) {
                                                ++calls;
                                                EXPECT_LT((c - th).norm(), 1e-6);
                                                return 1.0;
                                            },
                                            rng);
    EXPECT_GT(calls, 0);
    EXPECT_TRUE(res.feasible);
}

TEST(Randomization, MoreDrawsNeverWorseAndUnitModulus) {
    Rng g(17);
    const MatC a = g.cscg_matrix(5, 5);
    const MatC tb = a * a.adjoint();
    const VecC target = unit_phases(4, g);
    const ThetaEvaluator eval = [&](const VecC& c) {
        for (int i = 0; i < c.size(); ++i) EXPECT_NEAR(std::abs(c(i)), 1.0, 1e-14);
        return -(c - target).norm();
    };
    Rng r1(3), r2(3);
    const auto few = gaussian_randomization(tb, 1, eval, r1);
    const auto many = gaussian_randomization(tb, 100, eval, r2);
    EXPECT_GE(many.score, few.score);
    EXPECT_FALSE(many.feasible);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(many.theta(i)), 1.0, 1e-14);
}

TEST(RisStep, NearExhaustiveDiscreteOptimum) {
    // min normalized margin over all 4^4 alphabet points vs one randomized step
    for (int s = 0; s < 5; ++s) {
        const RobustProblem prob = make(small_config(4, 4), 200 + s);
        Rng rng(s);
        const VecC th0 = random_discrete_theta(4, 4, rng);
        const auto tx = solve_transmit(prob, th0, rng);
        ASSERT_EQ(tx.status, TransmitStatus::ok);
        double opt = -std::numeric_limits<double>::infinity();
        VecC t(4);
        for (int code = 0; code < 256; ++code) {
            for (int i = 0; i < 4; ++i) t(i) = std::exp(kJ * (2 * kPi * ((code >> (2 * i)) & 3) / 4 + kPi / 4));
            opt = std::max(opt, min_normalized_margin(prob, tx.s_tx, t));
        }
        const auto step = ris_step_sdr(prob, tx.s_tx, th0, rng, 100, true);
        EXPECT_EQ(step.sdp, SolveStatus::optimal);
        EXPECT_LE(step.score, opt + 1e-9);
        EXPECT_GE(step.score, min_normalized_margin(prob, tx.s_tx, th0) - 1e-12);
        EXPECT_GE(step.score, opt - 0.1 * std::abs(opt)) << "seed " << s << " exhaustive " << opt;
    }
}
