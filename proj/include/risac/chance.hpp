#pragma once

#include "risac/scene.hpp"
#include "risac/types.hpp"

#include <optional>

namespace risac {

/// LDI parameters: v_k per user and v~_l per target solve [1 - 1/(2v^2)] v = sqrt(ln(1/prob)).
struct ChanceParams {
    std::vector<double> v;
    std::vector<double> v_tilde;
    std::vector<double> rho;
    std::vector<double> p;
};

/// Per-user rate thresholds and per-target CRB thresholds.
struct Thresholds {
    std::vector<double> rate_bps_hz;
    std::vector<double> crb_max;
    int n_rx = 0;
    int n_samples = 1;
};

/// Everything the optimizers need for one trial. `a_dot` / `d_mat` cache the
/// angle-derivative matrices and Adot^H Adot per target.
struct RobustProblem {
    ChannelRealization real;
    Thresholds thr;
    ChanceParams chance;
    int phase_levels = 4;
    std::vector<MatC> a_dot;
    std::vector<MatC> d_mat;

    int n_tx() const { return real.n_tx(); }
    int n_ris() const { return real.n_ris(); }
    int n_users() const { return real.n_users(); }
    int n_targets() const { return real.n_targets(); }

    /// gamma_bu^2 + gamma_bru^2 M for user k.
    double error_energy(int k) const;
    /// 2 sqrt(ln(1/rho_k)).
    double kappa(int k) const;
};

RobustProblem make_problem(const ScenarioConfig& cfg, ChannelRealization real);

/// Closed-form root v > 1/sqrt(2) of [1 - 1/(2v^2)] v = sqrt(ln(1/prob)).
double solve_v(double prob);

ChanceParams make_chance_params(const std::vector<double>& rho, const std::vector<double>& p);

/// Tail bound of the decomposition-based large deviation inequality for
/// Pr{x^H Q x + 2 Re(r^H x) <= Tr Q - eta}, x ~ CN(0, I).
double ldi_bound(double q_norm_f, double r_norm, double trace_q, double eta, double v);

/// Psi_k = (2^r - 1)^{-1} s_k s_k^H - S_{-k} S_{-k}^H.
MatC psi_matrix(const MatC& s_tx, int k, double rate_bps_hz);

/// Quadratic form of the rate-outage event in the normalized error vector
/// e = [e_bu; conj(vec(E_bru))]: e^H Q e + 2 Re(r^H e) + s >= 0.
struct CommQuadraticForm {
    MatC q_mat;  ///< (N + MN) square; empty unless materialized
    VecC r_vec;  ///< N + MN; empty unless materialized
    double s_scalar = 0.0;
    MatC psi;
    RowC c_row;          ///< effective channel h^H + theta^H H
    double error_energy = 0.0;  ///< gamma_bu^2 + gamma_bru^2 M
};

CommQuadraticForm build_comm_form(const MatC& s_tx, const VecC& theta, const VecC& h_hat, const MatC& h_bru_hat,
                                  double gamma_bu, double gamma_bru, double rate_bps_hz, double sigma2, int k,
                                  bool materialize = true);

/// Simplified SOC ingredients of the safe rate-outage restriction.
struct CommSocTerms {
    double lhs = 0.0;  ///< (gamma_bu^2 + gamma_bru^2 M) Tr Psi + s
    VecC x_vec;        ///< sqrt(a/2) Psi c^H; x = ||x_vec||
    double x = 0.0;
    double y = 0.0;  ///< v a ||Psi||_F
    double kappa = 0.0;

    /// lhs - 2 sqrt(ln(1/rho)) (x + y); the restriction holds iff >= 0.
    double margin() const { return lhs - kappa * (x + y); }
};

CommSocTerms comm_soc_terms(const CommQuadraticForm& form, double v, double rho);

/// Robust rate margin of user k at (S, theta); >= 0 certifies the outage constraint.
double comm_margin(const RobustProblem& prob, const MatC& s_tx, const VecC& theta, int k);

/// Lower bound on Tr(S^H Adot^H Adot S) that certifies the CRB-failure
/// constraint, or std::nullopt when no finite power can satisfy it.
std::optional<double> sensing_rhs(cdouble alpha_hat, double eps, double crb_max, double sigma2_sen, double p,
                                  double v_tilde, int n_samples = 1);

/// Empirical violation frequencies under sampled errors.
struct OutageReport {
    std::vector<double> rate_outage;  ///< per user
    std::vector<double> crb_failure;  ///< per target
    int n_draws = 0;

    double max_rate_outage() const;
    double max_crb_failure() const;
};

OutageReport empirical_outage(const RobustProblem& prob, const MatC& s_tx, const VecC& theta, int n_draws,
                              Rng& rng);

/// Binomial Monte Carlo standard deviation sqrt(p(1-p)/n).
inline double binomial_sigma(double p, int n) { return std::sqrt(p * (1.0 - p) / n); }

}  // namespace risac
