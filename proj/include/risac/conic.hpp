#pragma once

#include "risac/types.hpp"

#include <Eigen/Sparse>

#include <iosfwd>
#include <optional>
#include <string>

namespace risac {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

/// One nonzero of a symmetric coefficient matrix. Both (r, c) and (c, r) are
/// stored for off-diagonal entries.
struct SymEntry {
    int row = 0;
    int col = 0;
    double val = 0.0;
};

/// Linear cone: a0 + A x >= 0 componentwise.
struct LinearCone {
    SpMat a;
    VecR a0;
};

/// Second-order cone: s = g0 + G x with s(0) >= ||s(1:)||.
struct SocBlock {
    SpMat g;
    VecR g0;
};

/// PSD cone: F0 + sum_j x_j F_j >= 0 with sparse symmetric F_j.
struct PsdBlock {
    int dim = 0;
    MatR f0;
    std::vector<std::pair<int, std::vector<SymEntry>>> coeffs;  ///< (variable, entries)
};

struct VarBlock {
    std::string name;
    int offset = 0;
    int size = 0;
};

/// min c^T x  s.t.  E x = f, linear, second-order and PSD cone constraints.
struct ConicProgram {
    int n_vars = 0;
    VecR c;
    SpMat eq_a;
    VecR eq_b;
    LinearCone lin;
    std::vector<SocBlock> soc;
    std::vector<PsdBlock> psd;
    std::vector<VarBlock> vars;

    /// Appends a named variable block and returns its offset.
    int add_variables(const std::string& name, int count);
    /// Barrier parameter: #linear + 2 #soc + sum of PSD dimensions.
    double barrier_degree() const;
    /// Throws DimensionError when maps disagree with n_vars.
    void validate() const;
    /// Plain-text sparse dump, one coefficient per line:
    ///   vars <n>
    ///   obj <j> <v>
    ///   eq <row> <j> <v>         eqrhs <row> <v>
    ///   lin <row> <j> <v>        lin0 <row> <v>
    ///   soc <blk> <row> <j> <v>  soc0 <blk> <row> <v>
    ///   psd <blk> <j> <r> <c> <v>   (j = -1 for the constant term)
    void dump(std::ostream& os) const;
};

/// Incremental builder for the linear and SOC parts.
class ConicBuilder {
public:
    explicit ConicBuilder(ConicProgram& prog) : prog_(prog) {}

    /// Adds one row a0 + sum coef_j x_j >= 0; returns its index.
    int add_linear(double a0, const std::vector<std::pair<int, double>>& coefs);
    /// Adds one equality row sum coef_j x_j = b.
    int add_equality(double b, const std::vector<std::pair<int, double>>& coefs);
    /// Adds an SOC block; rows[i] is (constant, coefficients) of s(i).
    void add_soc(const std::vector<std::pair<double, std::vector<std::pair<int, double>>>>& rows);
    /// Finalizes the sparse matrices; must be called before solve.
    void finish();

private:
    ConicProgram& prog_;
    std::vector<Triplet> lin_, eq_;
    std::vector<double> lin0_, eq0_;
};

enum class SolveStatus { optimal, infeasible, unbounded, max_iter };

const char* to_string(SolveStatus s);

struct KktResiduals {
    double primal = 0.0;  ///< max constraint violation
    double dual = 0.0;    ///< ||c - A^* z|| / (1 + ||c||)
    double gap = 0.0;     ///< primal - dual objective
};

struct ConicSolution {
    SolveStatus status = SolveStatus::max_iter;
    VecR x;
    VecR z_lin;
    std::vector<VecR> z_soc;
    std::vector<MatR> z_psd;
    VecR y_eq;
    double objective = 0.0;
    double dual_objective = 0.0;
    KktResiduals kkt;
    int iterations = 0;
};

struct SolveOptions {
    double tol = 1e-7;
    int max_iter = 200;  ///< Newton steps per phase
    double mu = 20.0;
    double unbounded_norm = 1e10;
};

/// Two-phase log-barrier path following (Newton centering, damped steps).
/// Deterministic for identical inputs.
ConicSolution solve(const ConicProgram& prog, const SolveOptions& opt = {});

/// [[Re H, -Im H], [Im H, Re H]]. Throws DomainError for non-Hermitian input.
MatR embed_hermitian(const MatC& h);

/// Inverse of the embedding on its range; any real symmetric PSD X maps to a
/// Hermitian PSD matrix ((X11 + X22) + j (X21 - X12)) / 2.
MatC compress_hermitian(const MatR& x);

/// sqrt(l1) u1 (first nonzero entry real positive) when l2/l1 <= rank_tol, else
/// std::nullopt. Throws DomainError for an indefinite matrix.
std::optional<VecC> extract_rank_one(const MatC& g, double rank_tol = 1e-6);

/// Hermitian n x n matrix variable parameterized by n^2 reals: diagonal, then
/// real and imaginary parts of the strict upper triangle.
struct HermitianVar {
    int offset = 0;
    int n = 0;

    static HermitianVar add(ConicProgram& prog, const std::string& name, int n);

    int size() const { return n * n; }
    int diag(int i) const { return offset + i; }
    int re(int i, int j) const;  ///< i < j
    int im(int i, int j) const;  ///< i < j

    /// Real coefficients of Re Tr(A H) for arbitrary square A.
    std::vector<std::pair<int, double>> trace_coeffs(const MatC& a, double scale = 1.0) const;
    /// Real/imaginary coefficient lists of entry H(i, j) times w.
    void entry_coeffs(int i, int j, cdouble w, std::vector<std::pair<int, double>>& re_part,
                      std::vector<std::pair<int, double>>& im_part) const;
    /// Adds H >= 0 as a 2n real PSD block.
    void add_psd(ConicProgram& prog, double scale = 1.0) const;

    MatC value(const VecR& x) const;
};

}  // namespace risac
