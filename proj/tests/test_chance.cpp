#include "risac/chance.hpp"
#include "risac/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace risac;

namespace {

MatC random_hermitian(int n, Rng& rng) {
    const MatC a = rng.cscg_matrix(n, n);
    return (a + a.adjoint()) / 2.0;
}

// Rate-event bracket evaluated straight from the perturbed channel.
double direct_bracket(const MatC& s, const VecC& theta, const VecC& h, const MatC& hbru, const VecC& dh,
                      const MatC& dH, double r, double sigma2, int k) {
    RowC c = (h + dh).adjoint();
    if (theta.size() > 0) c += theta.adjoint() * (hbru + dH);
    const MatC psi = psi_matrix(s, k, r);
    return (c * psi * c.adjoint())(0).real() - sigma2;
}

}  // namespace

TEST(SolveV, KnownRoots) {
    EXPECT_NEAR(solve_v(std::exp(-1.0)), (1 + std::sqrt(3.0)) / 2, 1e-12);
    EXPECT_NEAR(solve_v(0.05), 1.982966, 1e-6);
    double prev = 0.0;
    for (double p : {0.5, 0.2, 0.1, 0.05, 0.01, 1e-4}) {
        const double v = solve_v(p);
        EXPECT_GT(v, 1 / std::sqrt(2.0));
        EXPECT_LT(std::abs((1 - 1 / (2 * v * v)) * v - std::sqrt(std::log(1 / p))), 1e-12);
        EXPECT_GT(v, prev);
        prev = v;
    }
    EXPECT_THROW(solve_v(0.0), DomainError);
    EXPECT_THROW(solve_v(1.0), DomainError);
}

TEST(LdiBound, HandCaseAndContinuity) {
    EXPECT_NEAR(ldi_bound(0.0, 1.0, 0.0, 2.0, std::sqrt(2.0)), std::exp(-3.0 + 9.0 / 8.0), 1e-12);
    const double v = 1.7, qf = 0.8, rn = 0.6;
    const double tt = v * qf + rn / std::sqrt(2.0);
    const double split = 2 * (1 - 1 / (2 * v * v)) * v * tt;
    EXPECT_NEAR(ldi_bound(qf, rn, 0.0, split * (1 - 1e-12), v), ldi_bound(qf, rn, 0.0, split * (1 + 1e-12), v),
                1e-9);
    EXPECT_THROW(ldi_bound(qf, rn, 0.0, 0.0, v), DomainError);
    EXPECT_THROW(ldi_bound(qf, rn, 0.0, 1.0, 0.7), DomainError);
}

TEST(LdiBound, DominatesEmpiricalTail) {
    Rng rng(21);
    for (int c = 0; c < 20; ++c) {
        const int n = 2 + c % 4;
        const MatC q = random_hermitian(n, rng);
        const VecC r = rng.cscg_vector(n) * (0.3 + rng.uniform());
        const double v = 0.8 + 2 * rng.uniform();
        const double tt = v * q.norm() + r.norm() / std::sqrt(2.0);
        const double eta = tt * (0.5 + 3 * rng.uniform());
        const double trq = q.trace().real();
        const int draws = 100000;
        int hits = 0;
        for (int d = 0; d < draws; ++d) {
            const VecC x = rng.cscg_vector(n);
            const double val = (x.adjoint() * q * x)(0).real() + 2 * (r.adjoint() * x)(0).real();
            if (val <= trq - eta) ++hits;
        }
        const double bound = ldi_bound(q.norm(), r.norm(), trq, eta, v);
        EXPECT_LE(double(hits) / draws, bound + 3 * binomial_sigma(std::min(bound, 0.5), draws)) << "config " << c;
    }
}

TEST(CommForm, ErrorFreeCollapse) {
    Rng rng(22);
    const MatC s = rng.cscg_matrix(3, 2);
    const VecC th = rng.cscg_vector(2);
    const VecC h = rng.cscg_vector(3);
    const MatC H = rng.cscg_matrix(2, 3);
    const auto f = build_comm_form(s, th, h, H, 0.0, 0.0, 1.5, 0.2, 0);
    EXPECT_EQ(f.q_mat.norm(), 0.0);
    EXPECT_EQ(f.r_vec.norm(), 0.0);
    const RowC c = h.adjoint() + th.adjoint() * H;
    EXPECT_NEAR(f.s_scalar, (c * psi_matrix(s, 0, 1.5) * c.adjoint())(0).real() - 0.2, 1e-12);
}

TEST(CommForm, PsiDefinition) {
    Rng rng(23);
    const MatC s = rng.cscg_matrix(4, 3);
    const MatC psi = psi_matrix(s, 1, 2.0);
    MatC expect = s.col(1) * s.col(1).adjoint() / 3.0;
    expect -= s.col(0) * s.col(0).adjoint() + s.col(2) * s.col(2).adjoint();
    EXPECT_NEAR((psi - expect).norm(), 0.0, 1e-14);
}

TEST(CommForm, AppendixBIdentity) {
    Rng rng(24);
    for (int n : {2, 4, 8})
        for (int m : {2, 4, 8})
            for (int kk : {1, 2, 3}) {
                for (int t = 0; t < 3; ++t) {
                    const MatC s = rng.cscg_matrix(n, kk);
                    const VecC th = rng.cscg_vector(m);
                    const VecC h = rng.cscg_vector(n);
                    const MatC H = rng.cscg_matrix(m, n);
                    const double gb = 0.1 + rng.uniform(), gr = 0.1 + rng.uniform();
                    const int k = t % kk;
                    const auto f = build_comm_form(s, th, h, H, gb, gr, 1.0, 0.3, k);
                    EXPECT_NEAR((f.q_mat - f.q_mat.adjoint()).norm(), 0.0, 1e-12);
                    const VecC ebu = rng.cscg_vector(n);
                    const MatC E = rng.cscg_matrix(m, n);
                    VecC e(n + m * n);
                    e << ebu, E.reshaped().conjugate();
                    const double via_form =
                        (e.adjoint() * f.q_mat * e)(0).real() + 2 * (f.r_vec.adjoint() * e)(0).real() + f.s_scalar;
                    const double direct = direct_bracket(s, th, h, H, gb * ebu, gr * E, 1.0, 0.3, k);
                    EXPECT_NEAR(via_form, direct, 1e-10 * (1 + std::abs(direct)));
                }
            }
}

TEST(CommForm, ErrorEnergy) {
    Rng rng(25);
    for (int t = 0; t < 50; ++t) {
        const int n = 2 + t % 4, m = 1 + t % 5;
        const MatC s = rng.cscg_matrix(n, 2);
        const VecC th = rng.cscg_vector(m);
        const auto f = build_comm_form(s, th, rng.cscg_vector(n), rng.cscg_matrix(m, n), 0.3, 0.2, 1.0, 0.1, t % 2);
        const double a = 0.09 + 0.04 * m;
        EXPECT_NEAR(f.error_energy, a, 1e-15);
    }
}

TEST(CommForm, UnitModulusSimplifications) {
    Rng rng(26);
    for (int t = 0; t < 100; ++t) {
        const int n = 2 + t % 4, m = 1 + t % 6;
        const MatC s = rng.cscg_matrix(n, 2);
        VecC th(m);
        for (int i = 0; i < m; ++i) th(i) = std::exp(kJ * 2.0 * kPi * rng.uniform());
        const double gb = rng.uniform(), gr = rng.uniform();
        const auto f = build_comm_form(s, th, rng.cscg_vector(n), rng.cscg_matrix(m, n), gb, gr, 1.0, 0.1, t % 2);
        const double a = gb * gb + gr * gr * m;
        const double tr = f.psi.trace().real();
        EXPECT_NEAR(f.q_mat.trace().real(), a * tr, 1e-10 * (1 + std::abs(a * tr)));
        EXPECT_NEAR(f.q_mat.norm(), a * f.psi.norm(), 1e-10 * (1 + a * f.psi.norm()));
        const double cpsi = (f.c_row * f.psi).norm();
        EXPECT_NEAR(f.r_vec.norm(), std::sqrt(a) * cpsi, 1e-10 * (1 + cpsi));
        const auto soc = comm_soc_terms(f, 1.98, 0.05);
        EXPECT_NEAR(soc.lhs, f.q_mat.trace().real() + f.s_scalar, 1e-10 * (1 + std::abs(soc.lhs)));
        EXPECT_NEAR(soc.x, f.r_vec.norm() / std::sqrt(2.0), 1e-10 * (1 + soc.x));
        EXPECT_NEAR(soc.y, 1.98 * f.q_mat.norm(), 1e-10 * (1 + soc.y));
    }
}

TEST(CommSoc, ErrorFreeReducesToNominalSinr) {
    Rng rng(27);
    for (int t = 0; t < 30; ++t) {
        const MatC s = rng.cscg_matrix(3, 2);
        const VecC h = rng.cscg_vector(3);
        const auto f = build_comm_form(s, VecC(0), h, MatC(0, 3), 0.0, 0.0, 1.0, 0.5, 0);
        const auto soc = comm_soc_terms(f, 1.98, 0.05);
        EXPECT_EQ(soc.x + soc.y, 0.0);
        const bool ok = rate(h.adjoint(), s, 0, 0.5) >= 1.0;
        EXPECT_EQ(soc.margin() >= 0, ok);
    }
}

TEST(SensingRhs, DeterministicAndInfeasible) {
    const cdouble alpha{3e-4, -1e-4};
    const double c = 0.01, s2 = 1e-14;
    const double v = solve_v(0.05);
    EXPECT_NEAR(*sensing_rhs(alpha, 0.0, c, s2, 0.05, v), s2 / (2 * c * std::norm(alpha)), 1e-20);
    EXPECT_FALSE(sensing_rhs(alpha, 10 * std::abs(alpha), c, s2, 0.05, v).has_value());
}

TEST(SensingRhs, MeetsFailureProbability) {
    Rng rng(28);
    const double p = 0.05, v = solve_v(p), c = 0.01, s2 = 1e-3;
    int checked = 0;
    for (int t = 0; t < 10; ++t) {
        const cdouble alpha = rng.cscg();
        const double eps = 0.02 * std::abs(alpha) * (1 + t);
        const auto rhs = sensing_rhs(alpha, eps, c, s2, p, v);
        if (!rhs) continue;
        ++checked;
        const int draws = 100000;
        int fail = 0;
        for (int d = 0; d < draws; ++d) {
            const cdouble a = alpha + eps * rng.cscg();
            if (s2 / (2 * std::norm(a) * *rhs) > c) ++fail;
        }
        EXPECT_LE(double(fail) / draws, p + 3 * binomial_sigma(p, draws));
    }
    EXPECT_GT(checked, 3);
}

TEST(EmpiricalOutage, ZeroErrorIsDeterministic) {
    ScenarioConfig cfg;
    cfg.n_tx = 4;
    cfg.n_ris = 2;
    cfg.err_bu = cfg.err_bru = cfg.err_rc = 0.0;
    Rng rng(29);
    const RobustProblem prob = make_problem(cfg, sample_realization(cfg, rng));
    const MatC s = rng.cscg_matrix(4, 2) * 1e-2;
    const VecC th = VecC::Ones(2);
    const auto rep = empirical_outage(prob, s, th, 1000, rng);
    for (double o : rep.rate_outage) EXPECT_TRUE(o == 0.0 || o == 1.0);
    for (double o : rep.crb_failure) EXPECT_TRUE(o == 0.0 || o == 1.0);
}
