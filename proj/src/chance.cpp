#include "risac/chance.hpp"

#include "risac/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace risac {

double RobustProblem::error_energy(int k) const {
    const double gb = real.gamma_bu[k];
    const double gr = real.gamma_bru[k];
    return gb * gb + gr * gr * n_ris();
}

double RobustProblem::kappa(int k) const { return 2.0 * std::sqrt(std::log(1.0 / chance.rho[k])); }

RobustProblem make_problem(const ScenarioConfig& cfg, ChannelRealization real) {
    RobustProblem prob;
    prob.real = std::move(real);
    const int k_users = prob.real.n_users();
    const int l_targets = prob.real.n_targets();
    prob.thr.rate_bps_hz.assign(k_users, cfg.rate_threshold_bps_hz);
    prob.thr.crb_max.assign(l_targets, cfg.crb_threshold);
    prob.thr.n_rx = cfg.receive_antennas();
    prob.thr.n_samples = cfg.n_samples;
    prob.chance = make_chance_params(std::vector<double>(k_users, cfg.outage_prob),
                                     std::vector<double>(l_targets, cfg.fail_prob));
    prob.phase_levels = cfg.phase_levels;
    for (int l = 0; l < l_targets; ++l) {
        prob.a_dot.push_back(a_dot_matrix(prob.real.aod[l], prob.real.aoa[l], prob.real.n_tx(), prob.thr.n_rx));
        prob.d_mat.push_back(prob.a_dot.back().adjoint() * prob.a_dot.back());
    }
    return prob;
}

double solve_v(double prob) {
    if (!(prob > 0.0 && prob < 1.0)) throw DomainError("solve_v: probability must lie in (0,1)");
    const double s = std::sqrt(std::log(1.0 / prob));
    // v - 1/(2v) = s  <=>  2v^2 - 2sv - 1 = 0, positive root.
    double v = 0.5 * (s + std::sqrt(s * s + 2.0));
    // One Newton polish on the defining residual.
    const double residual = (1.0 - 1.0 / (2.0 * v * v)) * v - s;
    v -= residual / (1.0 + 1.0 / (2.0 * v * v));
    return v;
}

ChanceParams make_chance_params(const std::vector<double>& rho, const std::vector<double>& p) {
    ChanceParams c;
    c.rho = rho;
    c.p = p;
    for (double r : rho) c.v.push_back(solve_v(r));
    for (double q : p) c.v_tilde.push_back(solve_v(q));
    return c;
}

double ldi_bound(double q_norm_f, double r_norm, double /*trace_q*/, double eta, double v) {
    if (!(eta > 0.0)) throw DomainError("ldi_bound: eta must be positive");
    if (!(v > 1.0 / std::sqrt(2.0))) throw DomainError("ldi_bound: v must exceed 1/sqrt(2)");
    const double t = v * q_norm_f + r_norm / std::sqrt(2.0);
    if (t <= 0.0) return 0.0;  // deterministic quadratic form: the event is empty
    const double tv = (1.0 - 1.0 / (2.0 * v * v)) * v;
    if (eta <= 2.0 * tv * t) return std::exp(-eta * eta / (4.0 * t * t));
    return std::exp(-tv * eta / t + tv * tv);
}

MatC psi_matrix(const MatC& s_tx, int k, double rate_bps_hz) {
    const double snr = std::pow(2.0, rate_bps_hz) - 1.0;
    MatC psi = s_tx.col(k) * s_tx.col(k).adjoint() / snr;
    for (Eigen::Index i = 0; i < s_tx.cols(); ++i)
        if (i != k) psi -= s_tx.col(i) * s_tx.col(i).adjoint();
    return psi;
}

CommQuadraticForm build_comm_form(const MatC& s_tx, const VecC& theta, const VecC& h_hat, const MatC& h_bru_hat,
                                  double gamma_bu, double gamma_bru, double rate_bps_hz, double sigma2, int k,
                                  bool materialize) {
    const Eigen::Index n = s_tx.rows();
    const Eigen::Index m = theta.size();
    if (h_hat.size() != n || h_bru_hat.rows() != m || h_bru_hat.cols() != n)
        throw DimensionError("build_comm_form: channel dimensions do not match S and theta");
    if (k < 0 || k >= s_tx.cols()) throw DimensionError("build_comm_form: user index out of range");

    CommQuadraticForm f;
    f.psi = psi_matrix(s_tx, k, rate_bps_hz);
    f.c_row = h_hat.adjoint();
    if (m > 0) f.c_row += theta.adjoint() * h_bru_hat;
    f.s_scalar = (f.c_row * f.psi * f.c_row.adjoint())(0).real() - sigma2;
    f.error_energy = gamma_bu * gamma_bu + gamma_bru * gamma_bru * static_cast<double>(m);
    if (!materialize) return f;

    // e = [e_bu; conj(vec(E_bru))], vec column-major so index (n', m') -> n' M + m'.
    const Eigen::Index dim = n + m * n;
    f.q_mat = MatC::Zero(dim, dim);
    f.q_mat.topLeftCorner(n, n) = gamma_bu * gamma_bu * f.psi;
    const RowC theta_t = theta.transpose();
    const MatC outer = theta.conjugate() * theta.transpose();
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) {
            const cdouble p = f.psi(a, b);
            f.q_mat.block(a, n + b * m, 1, m) = gamma_bu * gamma_bru * p * theta_t;
            f.q_mat.block(n + a * m, b, m, 1) = gamma_bu * gamma_bru * p * theta.conjugate();
            f.q_mat.block(n + a * m, n + b * m, m, m) = gamma_bru * gamma_bru * p * outer;
        }
    }
    f.r_vec.resize(dim);
    const RowC c_psi = f.c_row * f.psi;
    f.r_vec.head(n) = gamma_bu * c_psi.adjoint();
    const MatC theta_c_psi = theta * c_psi;  // M x N
    f.r_vec.tail(m * n) = gamma_bru * theta_c_psi.reshaped().conjugate();
    return f;
}

CommSocTerms comm_soc_terms(const CommQuadraticForm& form, double v, double rho) {
    if (!(rho > 0.0 && rho < 1.0)) throw DomainError("comm_soc_terms: rho must lie in (0,1)");
    CommSocTerms t;
    const double a = form.error_energy;
    t.lhs = a * form.psi.trace().real() + form.s_scalar;
    t.x_vec = std::sqrt(a / 2.0) * (form.psi * form.c_row.adjoint());
    t.x = t.x_vec.norm();
    t.y = v * a * form.psi.norm();
    t.kappa = 2.0 * std::sqrt(std::log(1.0 / rho));
    return t;
}

double comm_margin(const RobustProblem& prob, const MatC& s_tx, const VecC& theta, int k) {
    const auto& r = prob.real;
    const auto form = build_comm_form(s_tx, theta, r.h_bu_hat[k], r.h_bru_hat[k], r.gamma_bu[k], r.gamma_bru[k],
                                      prob.thr.rate_bps_hz[k], r.sigma2_com[k], k, false);
    return comm_soc_terms(form, prob.chance.v[k], prob.chance.rho[k]).margin();
}

std::optional<double> sensing_rhs(cdouble alpha_hat, double eps, double crb_max, double sigma2_sen, double p,
                                  double v_tilde, int n_samples) {
    if (!(crb_max > 0.0)) throw DomainError("sensing_rhs: CRB threshold must be positive");
    if (!(sigma2_sen > 0.0)) throw DomainError("sensing_rhs: noise power must be positive");
    if (!(p > 0.0 && p < 1.0)) throw DomainError("sensing_rhs: p must lie in (0,1)");
    const double a2 = std::norm(alpha_hat);
    const double bracket = eps * eps + a2 -
                           2.0 * std::sqrt(std::log(1.0 / p)) *
                               (v_tilde * eps * eps + std::abs(eps * alpha_hat) / std::sqrt(2.0));
    if (!(bracket > 0.0)) return std::nullopt;
    // CRB <= c  <=>  |alpha|^2 >= sigma^2 / (2 c T Tr(.)).
    return sigma2_sen / (2.0 * crb_max * bracket * n_samples);
}

double OutageReport::max_rate_outage() const {
    return rate_outage.empty() ? 0.0 : *std::max_element(rate_outage.begin(), rate_outage.end());
}

double OutageReport::max_crb_failure() const {
    return crb_failure.empty() ? 0.0 : *std::max_element(crb_failure.begin(), crb_failure.end());
}

OutageReport empirical_outage(const RobustProblem& prob, const MatC& s_tx, const VecC& theta, int n_draws,
                              Rng& rng) {
    if (n_draws < 1) throw DomainError("empirical_outage: need at least one draw");
    const auto& r = prob.real;
    const int k_users = prob.n_users();
    const int l_targets = prob.n_targets();
    OutageReport rep;
    rep.n_draws = n_draws;
    std::vector<long> outages(k_users, 0);
    std::vector<long> failures(l_targets, 0);
    std::vector<double> traces(l_targets);
    for (int l = 0; l < l_targets; ++l) traces[l] = crb_trace(s_tx, prob.a_dot[l]);

    for (int d = 0; d < n_draws; ++d) {
        const ErrorDraw e = sample_errors(r, rng);
        for (int k = 0; k < k_users; ++k) {
            RowC c = (r.h_bu_hat[k] + e.dh_bu[k]).adjoint();
            if (theta.size() > 0) c += theta.adjoint() * (r.h_bru_hat[k] + e.dh_bru[k]);
            if (rate(c, s_tx, k, r.sigma2_com[k]) < prob.thr.rate_bps_hz[k]) ++outages[k];
        }
        for (int l = 0; l < l_targets; ++l) {
            const double info = 2.0 * std::norm(r.alpha_hat[l] + e.dalpha[l]) * traces[l] * prob.thr.n_samples;
            if (!(info > 0.0) || r.sigma2_sen / info > prob.thr.crb_max[l]) ++failures[l];
        }
    }
    for (int k = 0; k < k_users; ++k) rep.rate_outage.push_back(static_cast<double>(outages[k]) / n_draws);
    for (int l = 0; l < l_targets; ++l) rep.crb_failure.push_back(static_cast<double>(failures[l]) / n_draws);
    return rep;
}

}  // namespace risac
