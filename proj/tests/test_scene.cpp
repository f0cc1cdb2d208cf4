#include "risac/scene.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace risac;

namespace {

// Sample mean/variance of a complex scalar sampler.
template <class F>
std::pair<cdouble, double> moments(int n, F&& draw) {
    cdouble sum = 0.0;
    double sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const cdouble z = draw();
        sum += z;
        sum2 += std::norm(z);
    }
    const cdouble mean = sum / double(n);
    return {mean, sum2 / n - std::norm(mean)};
}

}  // namespace

TEST(Pathloss, KnownValues) {
    EXPECT_DOUBLE_EQ(pathloss_db(1.0, 4), -30.0);
    EXPECT_NEAR(pathloss_db(50.0, 2.2), -67.377, 5e-4);
    // -30 - 40 log10(70)
    EXPECT_NEAR(pathloss_db(70.0, 4), -103.804, 5e-4);
}

TEST(Pathloss, RejectsNonPositiveDistance) {
    EXPECT_THROW(pathloss_db(0.0, 2), DomainError);
    EXPECT_THROW(pathloss_db(-1.0, 2), DomainError);
}

TEST(Pathloss, MonotoneBeyondOneMetre) {
    for (double d = 1.5; d < 200; d *= 1.7) {
        EXPECT_GT(pathloss_db(d, 2.0), pathloss_db(d * 1.1, 2.0));
        EXPECT_GT(pathloss_db(d, 2.0), pathloss_db(d, 2.5));
    }
}

TEST(Steering, HandCases) {
    const VecC a0 = steering_tx(0.0, 4);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(a0(i) - 1.0), 0.0, 1e-15);
    const VecC a1 = steering_tx(kPi / 2, 2);
    EXPECT_NEAR(std::abs(a1(1) + 1.0), 0.0, 1e-12);
    const VecC a2 = steering_tx(kPi / 6, 3);
    EXPECT_NEAR(std::abs(a2(0) - 1.0), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(a2(1) - kJ), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(a2(2) + 1.0), 0.0, 1e-12);
}

TEST(Steering, UnitModulus) {
    Rng rng(3);
    for (int t = 0; t < 50; ++t) {
        const double phi = (rng.uniform() - 0.5) * kPi;
        const VecC a = steering_rx(phi, 1 + t % 9);
        for (int i = 0; i < a.size(); ++i) EXPECT_NEAR(std::abs(a(i)), 1.0, 1e-14);
    }
}

TEST(SteeringDeriv, HandCases) {
    const VecC d0 = steering_tx_deriv(0.0, 3);
    EXPECT_NEAR(std::abs(d0(0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(d0(1) - kJ * kPi), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(d0(2) - 2.0 * kJ * kPi), 0.0, 1e-12);
    EXPECT_NEAR(steering_rx_deriv(kPi / 2, 3).norm(), 0.0, 1e-12);
}

TEST(SteeringDeriv, MatchesCentralDifference) {
    Rng rng(4);
    const double h = 1e-6;
    for (int t = 0; t < 100; ++t) {
        const double phi = (rng.uniform() - 0.5) * 0.98 * kPi;
        const int n = 2 + t % 15;
        const VecC fd = (steering_tx(phi + h, n) - steering_tx(phi - h, n)) / (2 * h);
        const VecC an = steering_tx_deriv(phi, n);
        EXPECT_LE((fd - an).norm(), 1e-6 * an.norm() + 1e-9);
    }
}

TEST(Rician, LosLimitIsExact) {
    Rng rng(1);
    const MatC los = MatC::Ones(3, 2);
    const MatC h = sample_rician(los, std::numeric_limits<double>::infinity(), 1.0, rng);
    EXPECT_EQ(h, los);
}

TEST(Rician, RayleighVariance) {
    Rng rng(5);
    const double s = 0.3;
    const MatC los = MatC::Ones(1, 1);
    const auto [mean, var] = moments(100000, [&] { return sample_rician(los, 0.0, s, rng)(0, 0); });
    EXPECT_NEAR(var, s * s, 0.05 * s * s);
    EXPECT_LT(std::abs(mean), 0.05 * s);
}

TEST(Rician, UnitFactorMean) {
    Rng rng(6);
    const MatC los = MatC::Ones(1, 1);
    const auto [mean, var] = moments(100000, [&] { return sample_rician(los, 1.0, 1.0, rng)(0, 0); });
    EXPECT_NEAR(mean.real(), std::sqrt(0.5), 0.05 * std::sqrt(0.5));
    EXPECT_NEAR(var, 0.5, 0.05 * 0.5);
}

TEST(Rician, NegativeFactorThrows) {
    Rng rng(1);
    EXPECT_THROW(sample_rician(MatC::Ones(1, 1), -1.0, 1.0, rng), DomainError);
}

TEST(Cascade, IdentityAndSelector) {
    const int m = 4;
    EXPECT_TRUE(cascade(VecC::Ones(m), MatC::Identity(m, m)).isApprox(MatC::Identity(m, m)));
    Rng rng(2);
    const MatC hbr = rng.cscg_matrix(3, m);
    VecC e1 = VecC::Zero(m);
    e1(0) = 1.0;
    const MatC g = cascade(e1, hbr);
    EXPECT_NEAR((g.row(0).transpose() - hbr.col(0).conjugate()).norm(), 0.0, 1e-15);
    EXPECT_NEAR(g.bottomRows(m - 1).norm(), 0.0, 0.0);
}

TEST(Cascade, ReflectedPathIdentity) {
    Rng rng(7);
    for (int t = 0; t < 100; ++t) {
        const int n = 1 + t % 5, m = 1 + t % 7;
        const VecC h = rng.cscg_vector(m);
        const MatC hbr = rng.cscg_matrix(n, m);
        const VecC theta = rng.cscg_vector(m);
        const VecC s = rng.cscg_vector(n);
        const cdouble lhs = (theta.adjoint() * cascade(h, hbr) * s)(0);
        const MatC diag_theta = theta.asDiagonal();
        const cdouble rhs = (h.adjoint() * diag_theta.adjoint() * hbr.adjoint() * s)(0);
        EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-12 * (1 + std::abs(rhs)));
    }
}

TEST(Cascade, DimensionMismatchThrows) {
    EXPECT_THROW(cascade(VecC::Ones(3), MatC::Ones(2, 4)), DimensionError);
}

TEST(Errors, ZeroScalesGiveZero) {
    ScenarioConfig cfg;
    cfg.err_bu = cfg.err_bru = cfg.err_rc = 0.0;
    Rng rng(1);
    const auto real = sample_realization(cfg, rng);
    const auto e = sample_errors(real, rng);
    for (const auto& v : e.dh_bu) EXPECT_EQ(v.norm(), 0.0);
    for (const auto& v : e.dh_bru) EXPECT_EQ(v.norm(), 0.0);
    for (auto a : e.dalpha) EXPECT_EQ(std::abs(a), 0.0);
}

TEST(Errors, EntryVariances) {
    ChannelRealization real;
    real.h_bu_hat = {VecC::Zero(1)};
    real.h_bru_hat = {MatC::Zero(1, 1)};
    real.alpha_hat = {0.0};
    real.aod = real.aoa = {0.0};
    real.gamma_bu = {0.01};
    real.gamma_bru = {0.01};
    real.eps = {0.02};
    real.sigma2_com = {1.0};
    Rng rng(9);
    double vb = 0, vr = 0, are = 0, aim = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const auto e = sample_errors(real, rng);
        vb += std::norm(e.dh_bu[0](0));
        vr += std::norm(e.dh_bru[0](0, 0));
        are += e.dalpha[0].real() * e.dalpha[0].real();
        aim += e.dalpha[0].imag() * e.dalpha[0].imag();
    }
    EXPECT_NEAR(vb / n, 1e-4, 5e-6);
    EXPECT_NEAR(vr / n, 1e-4, 5e-6);
    EXPECT_NEAR(are / n, 2e-4, 1e-5);
    EXPECT_NEAR(aim / n, 2e-4, 1e-5);
}

TEST(TargetCoeff, MomentsAndDistanceLaw) {
    const double lam = 0.06, rcs = 1.0, d = 30.0;
    const double scale = target_coeff_scale(d, lam, rcs);
    EXPECT_NEAR(scale, std::sqrt(lam * lam * rcs / (64 * std::pow(kPi, 3) * std::pow(d, 4))), 1e-18);
    EXPECT_NEAR(target_coeff_scale(2 * d, lam, rcs) / scale, 0.25, 1e-12);
    Rng rng(11);
    const auto [mean, var] = moments(100000, [&] { return sample_target_coeff(d, lam, rcs, rng); });
    EXPECT_NEAR(std::sqrt(var), scale, 0.05 * scale);
    EXPECT_LT(std::abs(mean), 0.05 * scale);
    EXPECT_THROW(target_coeff_scale(0.0, lam, rcs), DomainError);
    EXPECT_THROW(target_coeff_scale(d, -1.0, rcs), DomainError);
}

TEST(Realization, BitReproducible) {
    ScenarioConfig cfg;
    Rng a(42), b(42);
    const auto r1 = sample_realization(cfg, a);
    const auto r2 = sample_realization(cfg, b);
    ASSERT_EQ(r1.n_users(), 2);
    for (int k = 0; k < r1.n_users(); ++k) {
        EXPECT_EQ(r1.h_bu_hat[k], r2.h_bu_hat[k]);
        EXPECT_EQ(r1.h_bru_hat[k], r2.h_bru_hat[k]);
    }
    for (int l = 0; l < r1.n_targets(); ++l) {
        EXPECT_EQ(r1.alpha_hat[l], r2.alpha_hat[l]);
        EXPECT_EQ(r1.aod[l], r2.aod[l]);
    }
}

TEST(Realization, GeometrySharedAcrossArraySizes) {
    ScenarioConfig small, large;
    small.n_ris = 4;
    large.n_ris = 32;
    large.n_tx = 8;
    Rng a(5), b(5);
    const auto r1 = sample_realization(small, a);
    const auto r2 = sample_realization(large, b);
    for (int l = 0; l < r1.n_targets(); ++l) {
        EXPECT_EQ(r1.alpha_hat[l], r2.alpha_hat[l]);
        EXPECT_EQ(r1.aod[l], r2.aod[l]);
    }
}

TEST(Realization, AnglesInRangeAndDimensions) {
    ScenarioConfig cfg;
    cfg.n_tx = 6;
    cfg.n_ris = 5;
    Rng rng(8);
    for (int t = 0; t < 20; ++t) {
        const auto r = sample_realization(cfg, rng);
        EXPECT_EQ(r.n_tx(), 6);
        EXPECT_EQ(r.n_ris(), 5);
        for (double a : r.aod) {
            EXPECT_GT(a, -kPi / 2);
            EXPECT_LT(a, kPi / 2);
        }
        for (const auto& h : r.h_bru_hat) EXPECT_TRUE(h.allFinite());
    }
}

TEST(Config, DefaultsAndRoundTrip) {
    const ScenarioConfig d = config_from_json("{}");
    EXPECT_EQ(d.n_tx, 16);
    EXPECT_EQ(d.n_users, 2);
    EXPECT_EQ(d.n_targets, 2);
    EXPECT_DOUBLE_EQ(d.rate_threshold_bps_hz, 2.0);
    EXPECT_DOUBLE_EQ(d.crb_threshold, 0.01);
    EXPECT_DOUBLE_EQ(d.noise_com_dbm, -110.0);
    EXPECT_DOUBLE_EQ(d.pathloss_br, 2.2);
    EXPECT_TRUE(std::isinf(d.rician_br));
    EXPECT_EQ(d.receive_antennas(), 16);
    const ScenarioConfig back = config_from_json(config_to_json(d));
    EXPECT_EQ(config_to_json(back), config_to_json(d));
}

TEST(Config, PhaseBitsAndValidation) {
    EXPECT_EQ(config_from_json(R"({"phase_bits":2})").phase_levels, 4);
    EXPECT_EQ(config_from_json(R"({"phase_bits":4})").phase_levels, 16);
    EXPECT_THROW(config_from_json(R"({"phase_bits":2,"phase_levels":8})"), DomainError);
    EXPECT_THROW(config_from_json(R"({"outage_prob":1.5})"), DomainError);
    EXPECT_THROW(config_from_json(R"({"n_tx":0})"), DomainError);
    EXPECT_THROW(config_from_json("[1,2]"), DomainError);
    EXPECT_THROW(config_from_json("{nope"), DomainError);
    EXPECT_DOUBLE_EQ(dbm_to_watts(30.0), 1.0);
    EXPECT_DOUBLE_EQ(watts_to_dbm(1e-3), 0.0);
}
