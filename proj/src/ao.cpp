#include "risac/ao.hpp"

#include "risac/gemm.hpp"
#include "risac/metrics.hpp"
#include "risac/sdr.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>

namespace risac {

const char* to_string(AoScheme s) {
    switch (s) {
        case AoScheme::sdr: return "sdr";
        case AoScheme::gemm: return "gemm";
        case AoScheme::continuous: return "continuous";
    }
    return "unknown";
}

AoScheme scheme_from_string(const std::string& s) {
    if (s == "sdr") return AoScheme::sdr;
    if (s == "gemm") return AoScheme::gemm;
    if (s == "continuous") return AoScheme::continuous;
    throw DomainError("unknown scheme '" + s + "'");
}

const char* to_string(AoStatus s) {
    switch (s) {
        case AoStatus::converged: return "converged";
        case AoStatus::max_iter: return "max_iter";
        case AoStatus::infeasible: return "infeasible";
    }
    return "unknown";
}

void AoConfig::validate() const {
    if (!(epsilon > 0.0)) throw DomainError("ao: epsilon must be positive");
    if (i_max < 1) throw DomainError("ao: i_max must be at least 1");
    if (g_max < 0) throw DomainError("ao: g_max must be non-negative");
}

std::string AoTrace::to_json() const {
    nlohmann::json j;
    j["status"] = to_string(status);
    j["iterations"] = iterations();
    j["wall_ms"] = wall_ms;
    j["power_w"] = feasible() ? nlohmann::json(power_w()) : nlohmann::json(nullptr);
    auto& arr = j["trace"] = nlohmann::json::array();
    for (const auto& it : iters)
        arr.push_back({{"power_w", it.power_w},
                       {"feasible", it.feasible},
                       {"rank_one", it.rank_one},
                       {"transmit_ms", it.transmit_ms},
                       {"ris_ms", it.ris_ms}});
    return j.dump();
}

bool satisfies_constraints(const RobustProblem& prob, const MatC& s_tx, const VecC& theta, double tol) {
    if (s_tx.size() == 0) return false;
    const auto& r = prob.real;
    for (int k = 0; k < prob.n_users(); ++k)
        if (!(comm_margin(prob, s_tx, theta, k) >= -tol * r.sigma2_com[k])) return false;
    for (int l = 0; l < prob.n_targets(); ++l) {
        const auto rhs = sensing_rhs(r.alpha_hat[l], r.eps[l], prob.thr.crb_max[l], r.sigma2_sen, prob.chance.p[l],
                                     prob.chance.v_tilde[l], prob.thr.n_samples);
        if (!rhs) return false;
        if (!(crb_trace(s_tx, prob.a_dot[l]) >= (1.0 - tol) * *rhs)) return false;
    }
    return true;
}

VecC random_discrete_theta(int m, int d, Rng& rng) {
    VecC t(m);
    for (int i = 0; i < m; ++i) t(i) = std::polar(1.0, 2.0 * kPi * rng.uniform_int(0, d - 1) / d + kPi / d);
    return t;
}

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

AoTrace run_ao(const RobustProblem& prob, const AoConfig& cfg) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    AoTrace trace;
    Rng rng(cfg.rng_seed);
    SolveOptions sopt;
    sopt.tol = cfg.solver_tol;
    const int m = prob.n_ris();
    const int d = prob.phase_levels;

    VecC theta = random_discrete_theta(m, d, rng);
    double best = std::numeric_limits<double>::infinity();
    double prev = std::numeric_limits<double>::infinity();
    bool converged = false;

    for (int i = 0; i < cfg.i_max; ++i) {
        AoIteration it;
        auto t0 = std::chrono::steady_clock::now();
        TransmitResult tx = solve_transmit(prob, theta, rng, cfg.g_max, sopt);
        if (tx.status != TransmitStatus::ok && i == 0) {
            // One fresh initialization before giving up.
            theta = random_discrete_theta(m, d, rng);
            tx = solve_transmit(prob, theta, rng, cfg.g_max, sopt);
        }
        it.transmit_ms = ms_since(t0);
        if (tx.status != TransmitStatus::ok) {
            // Keep the best iterate found so far.
            it.feasible = false;
            trace.iters.push_back(it);
            break;
        }
        it.power_w = tx.s_tx.squaredNorm();
        it.rank_one = tx.rank_one;
        it.feasible = satisfies_constraints(prob, tx.s_tx, theta);
        if (it.feasible && it.power_w < best) {
            best = it.power_w;
            trace.s_tx = tx.s_tx;
            trace.theta = theta;
        }
        const double power = it.power_w;
        if (std::isfinite(prev) && prev - power < cfg.epsilon * prev) {
            trace.iters.push_back(it);
            converged = true;
            break;
        }
        prev = power;
        if (i + 1 == cfg.i_max) {
            trace.iters.push_back(it);
            break;
        }

        t0 = std::chrono::steady_clock::now();
        switch (cfg.scheme) {
            case AoScheme::sdr:
                theta = ris_step_sdr(prob, tx.s_tx, theta, rng, cfg.g_max, true, sopt).theta;
                break;
            case AoScheme::continuous:
                theta = ris_step_sdr(prob, tx.s_tx, theta, rng, cfg.g_max, false, sopt).theta;
                break;
            case AoScheme::gemm: {
                GemmOptions gopt;
                gopt.lambda = cfg.lambda;
                gopt.i_max = cfg.gemm_i_max;
                theta = run_gemm(make_gemm_problem(prob, tx.s_tx), theta, gopt).theta;
                break;
            }
        }
        it.ris_ms = ms_since(t0);
        trace.iters.push_back(it);
    }

    if (trace.s_tx.size() == 0) trace.status = AoStatus::infeasible;
    else trace.status = converged ? AoStatus::converged : AoStatus::max_iter;
    trace.wall_ms = ms_since(start);
    return trace;
}

bool feasibility(const RobustProblem& prob, const AoConfig& cfg) {
    const AoTrace t = run_ao(prob, cfg);
    return t.feasible() && satisfies_constraints(prob, t.s_tx, t.theta);
}

}  // namespace risac
