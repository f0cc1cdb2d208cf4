#pragma once

#include "risac/types.hpp"

#include <array>
#include <optional>

namespace risac {

/// Achievable rate of user k given its effective channel row c_k.
double rate(const RowC& c_k, const MatC& s_tx, int k, double sigma2);

/// Derivative of b(phi) a(phi)^T with respect to the common target angle.
MatC a_dot_matrix(double aod, double aoa, int n_tx, int n_rx);

/// Tr(S^H Adot^H Adot S) = ||Adot S||_F^2.
double crb_trace(const MatC& s_tx, const MatC& a_dot);

/// DoA Cramer-Rao bound. std::nullopt stands for +infinity (beam orthogonal to
/// the derivative subspace, or alpha = 0). `n_samples` scales the Fisher information.
std::optional<double> crb(const MatC& s_tx, const MatC& a_dot, cdouble alpha, double sigma2_sen,
                          int n_samples = 1);

/// The three algebraic routes to Tr(S^H Adot^H Adot S): trace form,
/// vec/Kronecker form and per-column sum.
std::array<double, 3> crb_trace_forms(const MatC& s_tx, const MatC& a_dot);

/// Fisher information of the common angle, by central finite differences of the
/// noiseless echo mean m(phi) = alpha b(phi) a(phi)^T S x_t over unit-energy
/// samples x_t = e_t. Step must lie in [1e-7, 1e-3].
double fisher_numeric(const MatC& s_tx, double angle, int n_tx, int n_rx, cdouble alpha, double sigma2_sen,
                      double fd_step, int n_samples = 1);

}  // namespace risac
