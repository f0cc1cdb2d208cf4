#pragma once

#include "risac/chance.hpp"
#include "risac/conic.hpp"

#include <string>

namespace risac {

enum class AoScheme { sdr, gemm, continuous };

const char* to_string(AoScheme s);
/// Accepts "sdr", "gemm", "continuous". Throws DomainError otherwise.
AoScheme scheme_from_string(const std::string& s);

struct AoConfig {
    AoScheme scheme = AoScheme::gemm;
    int i_max = 30;
    /// Stop when the power decrease falls below epsilon times the previous power.
    double epsilon = 1e-3;
    int g_max = 100;
    double rank_tol = 1e-6;
    double solver_tol = 1e-7;
    double lambda = -1.0;  ///< GEMM penalty; < 0 picks 10 max_k |s_k| each iteration
    int gemm_i_max = 200;
    std::uint64_t rng_seed = 1;

    void validate() const;
};

struct AoIteration {
    double power_w = 0.0;
    bool feasible = false;
    bool rank_one = false;
    double transmit_ms = 0.0;
    double ris_ms = 0.0;
};

enum class AoStatus { converged, max_iter, infeasible };

const char* to_string(AoStatus s);

struct AoTrace {
    std::vector<AoIteration> iters;
    MatC s_tx;  ///< best feasible iterate
    VecC theta;
    AoStatus status = AoStatus::infeasible;
    double wall_ms = 0.0;

    bool feasible() const { return status != AoStatus::infeasible; }
    double power_w() const { return s_tx.squaredNorm(); }
    int iterations() const { return static_cast<int>(iters.size()); }
    /// One-line JSON record.
    std::string to_json() const;
};

/// Re-checks every safe constraint at (S, theta): rate margins >= -tol sigma^2 and
/// CRB traces >= (1 - tol) times their bound.
bool satisfies_constraints(const RobustProblem& prob, const MatC& s_tx, const VecC& theta, double tol = 1e-6);

/// Uniform draw from the phase alphabet.
VecC random_discrete_theta(int m, int d, Rng& rng);

AoTrace run_ao(const RobustProblem& prob, const AoConfig& cfg);

/// run_ao followed by a constraint re-check of the returned iterate.
bool feasibility(const RobustProblem& prob, const AoConfig& cfg);

}  // namespace risac
