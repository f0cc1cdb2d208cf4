#pragma once

#include "risac/chance.hpp"

namespace risac {

/// Per-user data of the penalized RIS objective with S fixed:
///   f(theta) = sum_k [ s_k(theta) - mu_k ||c_k(theta) Psi_k|| ]
/// with c_k = h^H + theta^H H, s_k = c Psi c^H - sigma^2, mu_k = sqrt(2 ln(1/rho_k) a_k).
struct GemmProblem {
    int n_ris = 0;
    int levels = 4;
    std::vector<MatC> h_bru;
    std::vector<VecC> h_bu;
    std::vector<MatC> psi;
    std::vector<double> sigma2;
    std::vector<double> mu;
    // Cached products.
    std::vector<MatC> hph;   ///< H Psi H^H
    std::vector<VecC> hpv;   ///< H Psi h
    std::vector<MatC> hp2h;  ///< H Psi^2 H^H
    std::vector<VecC> hp2v;  ///< H Psi^2 h
};

GemmProblem make_gemm_problem(const RobustProblem& prob, const MatC& s_tx);

/// Per-user nominal slacks s_k(theta).
std::vector<double> nominal_slacks(const GemmProblem& gp, const VecC& theta);

/// f(theta) + lambda ||theta||^2.
double sp_objective(const GemmProblem& gp, const VecC& theta, double lambda);

/// f(theta) + lambda (||theta_t||^2 + 2 Re<theta_t, theta - theta_t>).
double minorant(const GemmProblem& gp, const VecC& theta, const VecC& theta_t, double lambda);

/// Gradient of the minorant at z (Wirtinger 2 d/d conj(theta), equal to the
/// real gradient written as a complex vector).
VecC gradient(const GemmProblem& gp, const VecC& z, const VecC& theta_iter, double lambda);

/// Entrywise projection onto the regular d-gon with vertices exp(j(2 pi i + pi)/d).
VecC project_polygon(const VecC& theta, int d);
/// True when every entry lies in the polygon up to `slack`.
bool in_polygon(const VecC& theta, int d, double slack = 1e-9);

struct GemmState {
    VecC theta_cur;
    VecC theta_prev;
    double xi = 0.0;
    int iter = 0;
    double lambda = 0.0;
    double beta = 1.0;
};

struct GemmOptions {
    double lambda = -1.0;  ///< < 0: 10 max_k |s_k(theta_0)|
    int i_max = 200;
    /// Initial beta relative to ||grad|| / sqrt(M); doubled until the ascent
    /// condition holds, at most 2^20 times.
    double beta0 = 1.0;
    bool snap = true;
    /// Run a lambda = 0 ascent stage before the penalized stage. Without it a
    /// vertex start is a fixed point whenever the penalty dominates the data terms.
    bool continuation = true;
};

struct GemmResult {
    VecC theta;             ///< snapped when requested
    VecC theta_continuous;  ///< last accepted hull iterate
    std::vector<double> history;  ///< sp objective of accepted iterates, starting with the initial point
    int iterations = 0;
    double lambda = 0.0;  ///< penalty of the final stage
};

/// One fixed-lambda GEMM stage from `init`; appends to `res.history`.
void gemm_stage(const GemmProblem& gp, const VecC& init, double lambda, int i_max, double beta0, GemmResult& res);

GemmResult run_gemm(const GemmProblem& gp, const VecC& init, const GemmOptions& opt = {});

}  // namespace risac
