#include "risac/gemm.hpp"

#include "risac/sdr.hpp"

#include <algorithm>
#include <cmath>

namespace risac {

GemmProblem make_gemm_problem(const RobustProblem& prob, const MatC& s_tx) {
    GemmProblem gp;
    gp.n_ris = prob.n_ris();
    gp.levels = prob.phase_levels;
    const auto& r = prob.real;
    for (int k = 0; k < prob.n_users(); ++k) {
        const MatC psi = psi_matrix(s_tx, k, prob.thr.rate_bps_hz[k]);
        const MatC psi2 = psi * psi;
        const MatC& h = r.h_bru_hat[k];
        gp.h_bru.push_back(h);
        gp.h_bu.push_back(r.h_bu_hat[k]);
        gp.psi.push_back(psi);
        gp.sigma2.push_back(r.sigma2_com[k]);
        gp.mu.push_back(std::sqrt(2.0 * std::log(1.0 / prob.chance.rho[k]) * prob.error_energy(k)));
        gp.hph.push_back(h * psi * h.adjoint());
        gp.hpv.push_back(h * psi * r.h_bu_hat[k]);
        gp.hp2h.push_back(h * psi2 * h.adjoint());
        gp.hp2v.push_back(h * psi2 * r.h_bu_hat[k]);
    }
    return gp;
}

namespace {

RowC eff(const GemmProblem& gp, int k, const VecC& theta) {
    RowC c = gp.h_bu[k].adjoint();
    if (gp.n_ris > 0) c += theta.adjoint() * gp.h_bru[k];
    return c;
}

double data_terms(const GemmProblem& gp, const VecC& theta) {
    double f = 0.0;
    for (std::size_t k = 0; k < gp.psi.size(); ++k) {
        const RowC c = eff(gp, static_cast<int>(k), theta);
        const RowC cp = c * gp.psi[k];
        f += (cp * c.adjoint())(0).real() - gp.sigma2[k] - gp.mu[k] * cp.norm();
    }
    return f;
}

}  // namespace

std::vector<double> nominal_slacks(const GemmProblem& gp, const VecC& theta) {
    std::vector<double> s;
    for (std::size_t k = 0; k < gp.psi.size(); ++k) {
        const RowC c = eff(gp, static_cast<int>(k), theta);
        s.push_back((c * gp.psi[k] * c.adjoint())(0).real() - gp.sigma2[k]);
    }
    return s;
}

double sp_objective(const GemmProblem& gp, const VecC& theta, double lambda) {
    return data_terms(gp, theta) + lambda * theta.squaredNorm();
}

double minorant(const GemmProblem& gp, const VecC& theta, const VecC& theta_t, double lambda) {
    const double lin = theta_t.squaredNorm() + 2.0 * theta_t.dot(theta - theta_t).real();
    return data_terms(gp, theta) + lambda * lin;
}

VecC gradient(const GemmProblem& gp, const VecC& z, const VecC& theta_iter, double lambda) {
    VecC g = 2.0 * lambda * theta_iter;
    for (std::size_t k = 0; k < gp.psi.size(); ++k) {
        VecC zz = z;
        double nrm = (eff(gp, static_cast<int>(k), zz) * gp.psi[k]).norm();
        if (nrm <= 1e-12 * (1.0 + gp.psi[k].norm())) {
            // Vanishing norm: nudge z by a fixed pseudo-random 1e-9 step.
            Rng nudge(0x5eedULL + k);
            zz += 1e-9 * nudge.cscg_vector(z.size());
            nrm = (eff(gp, static_cast<int>(k), zz) * gp.psi[k]).norm();
        }
        g += 2.0 * (gp.hpv[k] + gp.hph[k] * zz);
        if (nrm > 0.0) g -= gp.mu[k] * (gp.hp2v[k] + gp.hp2h[k] * zz) / nrm;
    }
    return g;
}

VecC project_polygon(const VecC& theta, int d) {
    if (d < 3) throw DomainError("project_polygon: need d >= 3");
    const double step = 2.0 * kPi / d;
    const double cmax = std::cos(kPi / d);
    const double smax = std::sin(kPi / d);
    VecC out(theta.size());
    for (Eigen::Index m = 0; m < theta.size(); ++m) {
        const double n = std::floor((std::arg(theta(m)) + kPi / d) / step);
        const cdouble rot = std::polar(1.0, step * n);
        const cdouble t = theta(m) / rot;
        out(m) = rot * cdouble(std::clamp(t.real(), 0.0, cmax), std::clamp(t.imag(), -smax, smax));
    }
    return out;
}

bool in_polygon(const VecC& theta, int d, double slack) {
    // Inside iff every edge's outward normal projection is at most cos(pi/d).
    const double apothem = std::cos(kPi / d);
    for (Eigen::Index m = 0; m < theta.size(); ++m)
        for (int i = 0; i < d; ++i) {
            const cdouble normal = std::polar(1.0, 2.0 * kPi * i / d);
            if ((std::conj(normal) * theta(m)).real() > apothem + slack) return false;
        }
    return true;
}

void gemm_stage(const GemmProblem& gp, const VecC& init, double lambda, int i_max, double beta0, GemmResult& res) {
    const int d = gp.levels;
    GemmState st;
    st.theta_cur = init;
    st.theta_prev = init;
    st.xi = 0.0;
    st.lambda = lambda;
    double cur = sp_objective(gp, st.theta_cur, st.lambda);
    res.history.push_back(cur);

    const double scale_m = std::sqrt(std::max(1, gp.n_ris));
    for (st.iter = 0; st.iter < i_max; ++st.iter) {
        const double xi_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * st.xi * st.xi));
        const double alpha = (st.xi - 1.0) / xi_next;
        bool accepted = false;
        bool restarted = false;
        VecC next;
        double next_obj = cur;
        // Try the extrapolated point first; on a non-monotone result retry from theta_cur.
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            const VecC z = attempt == 0 ? VecC(st.theta_cur + alpha * (st.theta_cur - st.theta_prev)) : st.theta_cur;
            const VecC g = gradient(gp, z, st.theta_cur, st.lambda);
            const double gnorm = g.norm();
            if (!(gnorm > 0.0)) break;
            const double fz = minorant(gp, z, st.theta_cur, st.lambda);
            const double beta_base = beta0 * gnorm / scale_m;
            bool ascent = false;
            for (int dbl = 0; dbl <= 20; ++dbl) {
                st.beta = beta_base * std::ldexp(1.0, dbl);
                const VecC cand = project_polygon(z + g / st.beta, d);
                const VecC diff = cand - z;
                const double rhs = fz + g.dot(diff).real() - 0.5 * st.beta * diff.squaredNorm();
                if (minorant(gp, cand, st.theta_cur, st.lambda) >= rhs - 1e-15 * (1.0 + std::abs(rhs))) {
                    ascent = true;
                    next = cand;
                    break;
                }
            }
            if (!ascent) break;
            next_obj = sp_objective(gp, next, st.lambda);
            if (next_obj >= cur - 1e-12 * (1.0 + std::abs(cur))) accepted = true;
            restarted = attempt == 1;
        }
        if (!accepted) break;
        st.theta_prev = st.theta_cur;
        st.theta_cur = next;
        st.xi = restarted ? 0.0 : xi_next;
        const double gain = next_obj - cur;
        cur = next_obj;
        res.history.push_back(cur);
        ++res.iterations;
        if (std::abs(gain) <= 1e-12 * (1.0 + std::abs(cur))) break;
    }
    res.theta_continuous = st.theta_cur;
}

GemmResult run_gemm(const GemmProblem& gp, const VecC& init, const GemmOptions& opt) {
    GemmResult res;
    res.theta_continuous = init;
    VecC start = init;
    if (opt.continuation && opt.i_max > 0) {
        gemm_stage(gp, start, 0.0, opt.i_max, opt.beta0, res);
        start = res.theta_continuous;
    }
    if (opt.lambda >= 0.0) {
        res.lambda = opt.lambda;
    } else {
        double smax = 0.0;
        for (double s : nominal_slacks(gp, start)) smax = std::max(smax, std::abs(s));
        res.lambda = 10.0 * smax;
    }
    gemm_stage(gp, start, res.lambda, opt.i_max, opt.beta0, res);
    res.theta = opt.snap ? map_to_discrete(res.theta_continuous, gp.levels) : res.theta_continuous;
    return res;
}

}  // namespace risac
