#include "risac/sdr.hpp"

#include "risac/metrics.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace risac {

MatC lift(const VecC& theta) {
    VecC tb(theta.size() + 1);
    tb.head(theta.size()) = theta;
    tb(theta.size()) = 1.0;
    return tb * tb.adjoint();
}

namespace {

MatC hermitian_part(const MatC& a) { return 0.5 * (a + a.adjoint()); }

// [[H X H^H, H X h], [h^H X H^H, 0]] for H = h_bru (M x N), h = h_bu (N).
MatC lifted_block(const MatC& h_bru, const VecC& h_bu, const MatC& x) {
    const Eigen::Index m = h_bru.rows();
    MatC g = MatC::Zero(m + 1, m + 1);
    g.topLeftCorner(m, m) = h_bru * x * h_bru.adjoint();
    g.topRightCorner(m, 1) = h_bru * x * h_bu;
    g.bottomLeftCorner(1, m) = h_bu.adjoint() * x * h_bru.adjoint();
    return hermitian_part(g);
}

}  // namespace

RisSdpBlocks ris_blocks(const RobustProblem& prob, const MatC& s_tx) {
    RisSdpBlocks b;
    const auto& r = prob.real;
    for (int k = 0; k < prob.n_users(); ++k) {
        const MatC psi = psi_matrix(s_tx, k, prob.thr.rate_bps_hz[k]);
        const MatC pp = psi * psi.adjoint();
        b.g_bar.push_back(lifted_block(r.h_bru_hat[k], r.h_bu_hat[k], psi));
        b.g_tilde.push_back(lifted_block(r.h_bru_hat[k], r.h_bu_hat[k], pp));
        b.nominal_const.push_back((r.h_bu_hat[k].adjoint() * psi * r.h_bu_hat[k])(0).real());
        b.norm_const.push_back((r.h_bu_hat[k].adjoint() * pp * r.h_bu_hat[k])(0).real());
        b.psi.push_back(psi);
    }
    return b;
}

TransmitSdp build_transmit_sdp(const RobustProblem& prob, const VecC& theta) {
    const auto& r = prob.real;
    const int n = prob.n_tx();
    const int k_users = prob.n_users();
    if (theta.size() != prob.n_ris()) throw DimensionError("build_transmit_sdp: theta length differs from M");
    TransmitSdp sdp;

    std::vector<RowC> c_rows;
    double p0 = 0.0;
    for (int k = 0; k < k_users; ++k) {
        c_rows.push_back(r.effective_channel(k, theta));
        const double g2 = std::max(c_rows.back().squaredNorm(), 1e-300);
        p0 = std::max(p0, (std::pow(2.0, prob.thr.rate_bps_hz[k]) - 1.0) * r.sigma2_com[k] / g2);
    }
    for (int l = 0; l < prob.n_targets(); ++l) {
        const auto rhs = sensing_rhs(r.alpha_hat[l], r.eps[l], prob.thr.crb_max[l], r.sigma2_sen,
                                     prob.chance.p[l], prob.chance.v_tilde[l], prob.thr.n_samples);
        if (!rhs) {
            sdp.sensing_infeasible = true;
            sdp.sensing_bound.push_back(std::numeric_limits<double>::infinity());
            continue;
        }
        sdp.sensing_bound.push_back(*rhs);
        Eigen::SelfAdjointEigenSolver<MatC> es(prob.d_mat[l], Eigen::EigenvaluesOnly);
        p0 = std::max(p0, *rhs / std::max(es.eigenvalues().maxCoeff(), 1e-300));
    }
    if (sdp.sensing_infeasible) return sdp;
    sdp.p0 = p0 > 0.0 ? p0 : 1.0;

    ConicProgram& prog = sdp.prog;
    for (int k = 0; k < k_users; ++k) sdp.gamma.push_back(HermitianVar::add(prog, "gamma" + std::to_string(k), n));
    sdp.x_offset = prog.add_variables("x", k_users);
    sdp.y_offset = prog.add_variables("y", k_users);
    for (const auto& g : sdp.gamma)
        for (const auto& [j, v] : g.trace_coeffs(MatC::Identity(n, n))) prog.c(j) += v;

    ConicBuilder b(prog);
    using Coefs = std::vector<std::pair<int, double>>;
    for (int k = 0; k < k_users; ++k) {
        const double snr = std::pow(2.0, prob.thr.rate_bps_hz[k]) - 1.0;
        const double sigma2 = r.sigma2_com[k];
        const double a = prob.error_energy(k);
        const double kappa = prob.kappa(k);
        // Psi_k = p0 sum_m w_m G_m.
        std::vector<double> w(k_users, -1.0);
        w[k] = 1.0 / snr;

        // a Tr Psi + c Psi c^H - sigma^2 - kappa (x + y) >= 0, divided by sigma^2.
        const MatC a_mat = (a * MatC::Identity(n, n) + c_rows[k].adjoint() * c_rows[k]) * (sdp.p0 / sigma2);
        Coefs row;
        for (int m = 0; m < k_users; ++m) {
            const auto tc = sdp.gamma[m].trace_coeffs(a_mat, w[m]);
            row.insert(row.end(), tc.begin(), tc.end());
        }
        row.emplace_back(sdp.x_offset + k, -kappa);
        row.emplace_back(sdp.y_offset + k, -kappa);
        b.add_linear(-1.0, row);

        // x_k >= sqrt(a/2) ||Psi_k c^H|| / sigma^2.
        std::vector<std::pair<double, Coefs>> soc_x(1 + 2 * n);
        soc_x[0] = {0.0, {{sdp.x_offset + k, 1.0}}};
        const double sx = std::sqrt(a / 2.0) * sdp.p0 / sigma2;
        for (int i = 0; i < n; ++i) {
            Coefs re, im;
            for (int m = 0; m < k_users; ++m)
                for (int j = 0; j < n; ++j)
                    sdp.gamma[m].entry_coeffs(i, j, sx * w[m] * std::conj(c_rows[k](j)), re, im);
            soc_x[1 + i].second = std::move(re);
            soc_x[1 + n + i].second = std::move(im);
        }
        b.add_soc(soc_x);

        // y_k >= v a ||Psi_k||_F / sigma^2.
        std::vector<std::pair<double, Coefs>> soc_y;
        soc_y.push_back({0.0, {{sdp.y_offset + k, 1.0}}});
        const double sy = prob.chance.v[k] * a * sdp.p0 / sigma2;
        for (int i = 0; i < n; ++i) {
            Coefs d;
            for (int m = 0; m < k_users; ++m) d.emplace_back(sdp.gamma[m].diag(i), sy * w[m]);
            soc_y.push_back({0.0, std::move(d)});
        }
        const double r2 = std::sqrt(2.0);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                Coefs re, im;
                for (int m = 0; m < k_users; ++m) {
                    re.emplace_back(sdp.gamma[m].re(i, j), r2 * sy * w[m]);
                    im.emplace_back(sdp.gamma[m].im(i, j), r2 * sy * w[m]);
                }
                soc_y.push_back({0.0, std::move(re)});
                soc_y.push_back({0.0, std::move(im)});
            }
        b.add_soc(soc_y);
    }
    for (int l = 0; l < prob.n_targets(); ++l) {
        Coefs row;
        for (int m = 0; m < k_users; ++m) {
            const auto tc = sdp.gamma[m].trace_coeffs(prob.d_mat[l], sdp.p0 / sdp.sensing_bound[l]);
            row.insert(row.end(), tc.begin(), tc.end());
        }
        b.add_linear(-1.0, row);
    }
    b.finish();
    for (const auto& g : sdp.gamma) g.add_psd(prog);
    return sdp;
}

double min_normalized_margin(const RobustProblem& prob, const MatC& s_tx, const VecC& theta) {
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 0; k < prob.n_users(); ++k)
        worst = std::min(worst, comm_margin(prob, s_tx, theta, k) / prob.real.sigma2_com[k]);
    return worst;
}

std::optional<double> feasibility_scale(const RobustProblem& prob, const MatC& s_tx, const VecC& theta) {
    const auto& r = prob.real;
    double c2 = 0.0;
    for (int k = 0; k < prob.n_users(); ++k) {
        // Every term except -sigma^2 is quadratic in S.
        const double g = comm_margin(prob, s_tx, theta, k) + r.sigma2_com[k];
        if (!(g > 0.0)) return std::nullopt;
        c2 = std::max(c2, r.sigma2_com[k] / g);
    }
    for (int l = 0; l < prob.n_targets(); ++l) {
        const auto rhs = sensing_rhs(r.alpha_hat[l], r.eps[l], prob.thr.crb_max[l], r.sigma2_sen, prob.chance.p[l],
                                     prob.chance.v_tilde[l], prob.thr.n_samples);
        if (!rhs) return std::nullopt;
        const double tr = crb_trace(s_tx, prob.a_dot[l]);
        if (!(tr > 0.0)) return std::nullopt;
        c2 = std::max(c2, *rhs / tr);
    }
    return c2;
}

TransmitResult solve_transmit(const RobustProblem& prob, const VecC& theta, Rng& rng, int g_max,
                              const SolveOptions& opt) {
    TransmitResult res;
    const TransmitSdp sdp = build_transmit_sdp(prob, theta);
    if (sdp.sensing_infeasible) {
        res.solver = SolveStatus::infeasible;
        return res;
    }
    const ConicSolution sol = solve(sdp.prog, opt);
    res.solver = sol.status;
    res.solver_iterations = sol.iterations;
    if (sol.status == SolveStatus::infeasible || sol.status == SolveStatus::unbounded || sol.x.size() == 0) return res;

    const int n = prob.n_tx();
    const int k_users = prob.n_users();
    std::vector<MatC> gam;
    for (const auto& g : sdp.gamma) {
        gam.push_back(sdp.p0 * g.value(sol.x));
        res.sdr_power += gam.back().trace().real();
    }

    // Rank-one extraction first.
    MatC s(n, k_users);
    bool all_rank_one = true;
    for (int k = 0; k < k_users && all_rank_one; ++k) {
        std::optional<VecC> col;
        try {
            col = extract_rank_one(gam[k], 1e-6);
        } catch (const DomainError&) {
            col.reset();
        }
        if (col) s.col(k) = *col;
        else all_rank_one = false;
    }
    if (all_rank_one) {
        const auto c2 = feasibility_scale(prob, s, theta);
        if (c2) {
            res.s_tx = std::sqrt(std::max(1.0, *c2)) * s;
            res.rank_one = true;
            res.status = TransmitStatus::ok;
            return res;
        }
    }

    // Randomization: principal eigenvectors, then s_k ~ CN(0, Gamma_k).
    std::vector<MatC> factor;
    MatC principal(n, k_users);
    for (int k = 0; k < k_users; ++k) {
        Eigen::SelfAdjointEigenSolver<MatC> es(hermitian_part(gam[k]));
        const VecR ev = es.eigenvalues().cwiseMax(0.0);
        factor.push_back(es.eigenvectors() * ev.cwiseSqrt().asDiagonal());
        principal.col(k) = es.eigenvectors().col(n - 1) * std::sqrt(ev(n - 1));
    }
    double best = std::numeric_limits<double>::infinity();
    auto consider = [&](const MatC& cand) {
        const auto c2 = feasibility_scale(prob, cand, theta);
        if (!c2) return;
        const double pw = *c2 * cand.squaredNorm();
        if (pw < best) {
            best = pw;
            res.s_tx = std::sqrt(*c2) * cand;
        }
    };
    consider(principal);
    for (int g = 0; g < g_max; ++g) {
        MatC cand(n, k_users);
        for (int k = 0; k < k_users; ++k) cand.col(k) = factor[k] * rng.cscg_vector(n);
        consider(cand);
    }
    if (std::isfinite(best)) res.status = TransmitStatus::ok;
    return res;
}

RisSdp build_ris_sdp(const RobustProblem& prob, const MatC& s_tx, const VecC& theta_ref) {
    const int m = prob.n_ris();
    if (theta_ref.size() != m) throw DimensionError("build_ris_sdp: theta length differs from M");
    const auto& r = prob.real;
    const RisSdpBlocks blk = ris_blocks(prob, s_tx);
    RisSdp sdp;
    sdp.n = m + 1;
    const int k_users = prob.n_users();
    for (int k = 0; k < k_users; ++k) {
        const double sigma2 = r.sigma2_com[k];
        const double a = prob.error_energy(k);
        const double kappa = prob.kappa(k);
        const double y_bar = prob.chance.v[k] * a * blk.psi[k].norm();
        // w(Theta) = (a/2) ||c Psi||^2 is linear in Theta; sqrt(w) <= (w + w0) / (2 sqrt(w0)).
        const MatC th = lift(theta_ref);
        const double w0 = std::max((a / 2.0) * ((blk.g_tilde[k] * th).trace().real() + blk.norm_const[k]), 1e-300);
        const double e = kappa * (a / 2.0) / (2.0 * std::sqrt(w0));
        sdp.c_mat.push_back((blk.g_bar[k] - e * blk.g_tilde[k]) / sigma2);
        const double g = a * blk.psi[k].trace().real() + blk.nominal_const[k] - sigma2 - kappa * y_bar -
                         kappa * ((a / 2.0) * blk.norm_const[k] + w0) / (2.0 * std::sqrt(w0));
        sdp.g_const.push_back(g / sigma2);
    }

    ConicProgram& prog = sdp.prog;
    const int n = sdp.n;
    const int y_off = prog.add_variables("y", n);
    const int mu_off = prog.add_variables("mu", k_users);
    for (int i = 0; i < n; ++i) prog.c(y_off + i) = 1.0;
    for (int k = 0; k < k_users; ++k) prog.c(mu_off + k) = sdp.g_const[k];
    ConicBuilder b(prog);
    for (int k = 0; k < k_users; ++k) b.add_linear(0.0, {{mu_off + k, 1.0}});
    b.finish();

    PsdBlock psd;
    psd.dim = 2 * n;
    MatC sum_c = MatC::Zero(n, n);
    for (const auto& c : sdp.c_mat) sum_c += c;
    psd.f0 = -embed_hermitian(hermitian_part(sum_c));
    for (int i = 0; i < n; ++i) psd.coeffs.push_back({y_off + i, {{i, i, 1.0}, {n + i, n + i, 1.0}}});
    for (int k = 0; k < k_users; ++k) {
        const MatR ek = -embed_hermitian(hermitian_part(sdp.c_mat[k]));
        std::vector<SymEntry> entries;
        for (int cc = 0; cc < psd.dim; ++cc)
            for (int rr = 0; rr < psd.dim; ++rr)
                if (ek(rr, cc) != 0.0) entries.push_back({rr, cc, ek(rr, cc)});
        psd.coeffs.emplace_back(mu_off + k, std::move(entries));
    }
    prog.psd.push_back(std::move(psd));
    return sdp;
}

double ris_sdp_margin(const RisSdp& sdp, int k, const MatC& theta_bar) {
    return (sdp.c_mat[k] * theta_bar).trace().real() + sdp.g_const[k];
}

RisSdpResult solve_ris_sdp(const RisSdp& sdp, const SolveOptions& opt) {
    RisSdpResult res;
    const ConicSolution sol = solve(sdp.prog, opt);
    res.status = sol.status;
    if (sol.z_psd.empty()) return res;
    double g_sum = 0.0;
    for (double g : sdp.g_const) g_sum += g;
    res.bound = sol.objective + g_sum;
    // Stationarity in y_m forces the compressed multiplier to have diagonal 1/2.
    MatC th = 2.0 * compress_hermitian(sol.z_psd[0]);
    VecR d = th.diagonal().real().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    th = d.asDiagonal() * th * d.asDiagonal();
    res.theta_bar = hermitian_part(th);
    return res;
}

RandomizationResult gaussian_randomization(const MatC& theta_bar, int g_max, const ThetaEvaluator& evaluate,
                                           Rng& rng, const std::vector<VecC>& extra) {
    const Eigen::Index n = theta_bar.rows();
    const Eigen::Index m = n - 1;
    if (m < 0 || theta_bar.cols() != n) throw DimensionError("gaussian_randomization: need a square lifted matrix");
    RandomizationResult best;
    auto consider = [&](const VecC& cand) {
        const double s = evaluate(cand);
        if (s > best.score || best.theta.size() == 0) {
            best.score = s;
            best.theta = cand;
        }
    };
    auto normalize = [m](VecC v) {
        const cdouble last = v(m);
        if (std::abs(last) > 1e-12) v /= last;
        VecC out = v.head(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            const double a = std::abs(out(i));
            out(i) = a > 0.0 ? out(i) / a : cdouble(1.0, 0.0);
        }
        return out;
    };
    for (const auto& e : extra) consider(e);
    Eigen::SelfAdjointEigenSolver<MatC> es(hermitian_part(theta_bar));
    const VecR ev = es.eigenvalues().cwiseMax(0.0);
    const MatC factor = es.eigenvectors() * ev.cwiseSqrt().asDiagonal();
    consider(normalize(es.eigenvectors().col(n - 1)));
    for (int g = 0; g < g_max; ++g) consider(normalize(factor * rng.cscg_vector(n)));
    best.feasible = best.score >= 0.0;
    return best;
}

VecC map_to_discrete(const VecC& theta, int d) {
    if (d < 1) throw DomainError("map_to_discrete: need at least one level");
    VecC out(theta.size());
    for (Eigen::Index m = 0; m < theta.size(); ++m) {
        int best = 0;
        double best_dist = std::numeric_limits<double>::infinity();
        for (int i = 0; i < d; ++i) {
            const cdouble f = std::polar(1.0, 2.0 * kPi * i / d + kPi / d);
            const double dist = std::abs(theta(m) - f);
            if (dist < best_dist - 1e-12) {
                best = i;
                best_dist = dist;
            }
        }
        out(m) = std::polar(1.0, 2.0 * kPi * best / d + kPi / d);
    }
    return out;
}

RisStepResult ris_step_sdr(const RobustProblem& prob, const MatC& s_tx, const VecC& theta, Rng& rng, int g_max,
                           bool discrete, const SolveOptions& opt) {
    RisStepResult res;
    const int d = prob.phase_levels;
    const ThetaEvaluator eval = [&](const VecC& cand) {
        return min_normalized_margin(prob, s_tx, discrete ? map_to_discrete(cand, d) : cand);
    };
    res.theta = theta;
    res.score = eval(theta);
    const RisSdp sdp = build_ris_sdp(prob, s_tx, theta);
    const RisSdpResult sol = solve_ris_sdp(sdp, opt);
    res.sdp = sol.status;
    if (sol.status != SolveStatus::optimal && sol.status != SolveStatus::max_iter) return res;
    if (sol.theta_bar.size() == 0 || !sol.theta_bar.allFinite()) return res;
    const RandomizationResult rr = gaussian_randomization(sol.theta_bar, g_max, eval, rng, {theta});
    res.theta = discrete ? map_to_discrete(rr.theta, d) : rr.theta;
    res.score = rr.score;
    return res;
}

}  // namespace risac
