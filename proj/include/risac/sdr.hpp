#pragma once

#include "risac/chance.hpp"
#include "risac/conic.hpp"

#include <functional>
#include <limits>

namespace risac {

/// Lifted RIS quadratic forms per user, Hermitian, bottom-right entry 0:
///   c Psi c^H      = theta_bar^H g_bar theta_bar + h^H Psi h
///   ||c Psi||^2    = theta_bar^H g_tilde theta_bar + h^H Psi Psi^H h
/// with theta_bar = [theta; 1].
struct RisSdpBlocks {
    std::vector<MatC> g_bar;
    std::vector<MatC> g_tilde;
    std::vector<double> nominal_const;  ///< h^H Psi h
    std::vector<double> norm_const;     ///< h^H Psi Psi^H h
    std::vector<MatC> psi;
};

RisSdpBlocks ris_blocks(const RobustProblem& prob, const MatC& s_tx);

/// [theta; 1] [theta; 1]^H.
MatC lift(const VecC& theta);

/// Transmit-power SDR with every Gamma_k = p0 * G_k, G_k the program variables.
/// Rows are normalized: comm rows by sigma^2, sensing rows by their bound.
struct TransmitSdp {
    ConicProgram prog;
    std::vector<HermitianVar> gamma;
    int x_offset = 0;
    int y_offset = 0;
    double p0 = 1.0;
    std::vector<double> sensing_bound;
    bool sensing_infeasible = false;  ///< no finite power meets some CRB constraint
};

TransmitSdp build_transmit_sdp(const RobustProblem& prob, const VecC& theta);

/// Smallest c^2 with every safe constraint satisfied by (c S, theta), or
/// std::nullopt when no scaling works (some rate margin does not grow with power).
std::optional<double> feasibility_scale(const RobustProblem& prob, const MatC& s_tx, const VecC& theta);

enum class TransmitStatus { ok, infeasible };

struct TransmitResult {
    TransmitStatus status = TransmitStatus::infeasible;
    MatC s_tx;
    double sdr_power = 0.0;  ///< sum Tr Gamma_k, a lower bound on ||S||_F^2
    bool rank_one = false;
    SolveStatus solver = SolveStatus::max_iter;
    int solver_iterations = 0;
};

/// Solves the SDR, extracts rank-one columns or falls back to randomization
/// (s_k ~ CN(0, Gamma_k), common rescale, minimum power over g_max draws).
TransmitResult solve_transmit(const RobustProblem& prob, const VecC& theta, Rng& rng, int g_max = 100,
                              const SolveOptions& opt = {});

/// Minimum over users of the safe rate margin divided by sigma^2.
double min_normalized_margin(const RobustProblem& prob, const MatC& s_tx, const VecC& theta);

/// Scheme-1 RIS SDP, posed through its Lagrange dual
///   min sum y_m + sum (1 + mu_k) g_k  s.t.  Diag(y) - sum (1 + mu_k) C_k >= 0, mu >= 0,
/// whose PSD multiplier is the lifted RIS matrix. The rate-norm term is
/// linearized at `theta_ref` (a safe upper bound, tight at theta_ref).
struct RisSdp {
    ConicProgram prog;
    int n = 0;  ///< M + 1
    std::vector<MatC> c_mat;
    std::vector<double> g_const;
};

RisSdp build_ris_sdp(const RobustProblem& prob, const MatC& s_tx, const VecC& theta_ref);

/// Linearized normalized margin sum_k-term at a lifted matrix: Tr(C_k Theta) + g_k.
double ris_sdp_margin(const RisSdp& sdp, int k, const MatC& theta_bar);

struct RisSdpResult {
    SolveStatus status = SolveStatus::max_iter;
    MatC theta_bar;      ///< unit-diagonal lifted matrix
    double bound = 0.0;  ///< optimal value of the relaxation
};

RisSdpResult solve_ris_sdp(const RisSdp& sdp, const SolveOptions& opt = {});

using ThetaEvaluator = std::function<double(const VecC&)>;

struct RandomizationResult {
    VecC theta;
    double score = -std::numeric_limits<double>::infinity();
    bool feasible = false;  ///< best score >= 0
};

/// Gaussian randomization over theta_bar = V Sigma V^H: candidates
/// V Sigma^{1/2} x, divided by the last entry, truncated, projected to unit modulus.
/// `extra` candidates (already M-vectors) compete on equal terms.
RandomizationResult gaussian_randomization(const MatC& theta_bar, int g_max, const ThetaEvaluator& evaluate,
                                           Rng& rng, const std::vector<VecC>& extra = {});

/// Nearest point of {exp(j(2 pi i / d + pi / d))}; ties go to the smaller i.
VecC map_to_discrete(const VecC& theta, int d);

struct RisStepResult {
    VecC theta;
    double score = 0.0;
    SolveStatus sdp = SolveStatus::max_iter;
};

/// One Scheme-1 RIS update. With `discrete` the candidates are scored after
/// mapping to the alphabet and the result is discrete. The current theta is
/// always a candidate, so the returned score never falls below its score.
RisStepResult ris_step_sdr(const RobustProblem& prob, const MatC& s_tx, const VecC& theta, Rng& rng,
                           int g_max = 100, bool discrete = true, const SolveOptions& opt = {});

}  // namespace risac
