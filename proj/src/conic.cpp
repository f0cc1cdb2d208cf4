#include "risac/conic.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>

namespace risac {

int ConicProgram::add_variables(const std::string& name, int count) {
    if (count < 0) throw DimensionError("add_variables: negative count");
    const int off = n_vars;
    vars.push_back({name, off, count});
    n_vars += count;
    c.conservativeResize(n_vars);
    c.tail(count).setZero();
    return off;
}

double ConicProgram::barrier_degree() const {
    double nu = static_cast<double>(lin.a0.size()) + 2.0 * static_cast<double>(soc.size());
    for (const auto& b : psd) nu += b.dim;
    return nu;
}

void ConicProgram::validate() const {
    if (c.size() != n_vars) throw DimensionError("conic: objective length differs from n_vars");
    if (lin.a0.size() > 0 && (lin.a.rows() != lin.a0.size() || lin.a.cols() != n_vars))
        throw DimensionError("conic: linear cone map has wrong shape");
    if (eq_b.size() > 0 && (eq_a.rows() != eq_b.size() || eq_a.cols() != n_vars))
        throw DimensionError("conic: equality map has wrong shape");
    for (const auto& b : soc) {
        if (b.g0.size() < 1 || b.g.rows() != b.g0.size() || b.g.cols() != n_vars)
            throw DimensionError("conic: SOC map has wrong shape");
    }
    for (const auto& b : psd) {
        if (b.f0.rows() != b.dim || b.f0.cols() != b.dim) throw DimensionError("conic: PSD constant has wrong shape");
        if ((b.f0 - b.f0.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + b.f0.cwiseAbs().maxCoeff()))
            throw DimensionError("conic: PSD constant is not symmetric");
        for (const auto& [j, entries] : b.coeffs) {
            if (j < 0 || j >= n_vars) throw DimensionError("conic: PSD coefficient refers to unknown variable");
            for (const auto& e : entries)
                if (e.row < 0 || e.col < 0 || e.row >= b.dim || e.col >= b.dim)
                    throw DimensionError("conic: PSD coefficient out of range");
        }
    }
}

void ConicProgram::dump(std::ostream& os) const {
    os.precision(17);
    os << "vars " << n_vars << '\n';
    for (int j = 0; j < n_vars; ++j)
        if (c(j) != 0.0) os << "obj " << j << ' ' << c(j) << '\n';
    for (int r = 0; r < eq_a.rows(); ++r) {
        for (SpMat::InnerIterator it(eq_a, r); it; ++it) os << "eq " << r << ' ' << it.col() << ' ' << it.value() << '\n';
        os << "eqrhs " << r << ' ' << eq_b(r) << '\n';
    }
    for (int r = 0; r < lin.a.rows(); ++r) {
        for (SpMat::InnerIterator it(lin.a, r); it; ++it)
            os << "lin " << r << ' ' << it.col() << ' ' << it.value() << '\n';
        os << "lin0 " << r << ' ' << lin.a0(r) << '\n';
    }
    for (std::size_t b = 0; b < soc.size(); ++b) {
        for (int r = 0; r < soc[b].g.rows(); ++r) {
            for (SpMat::InnerIterator it(soc[b].g, r); it; ++it)
                os << "soc " << b << ' ' << r << ' ' << it.col() << ' ' << it.value() << '\n';
            if (soc[b].g0(r) != 0.0) os << "soc0 " << b << ' ' << r << ' ' << soc[b].g0(r) << '\n';
        }
    }
    for (std::size_t b = 0; b < psd.size(); ++b) {
        const auto& blk = psd[b];
        for (int r = 0; r < blk.dim; ++r)
            for (int cc = 0; cc < blk.dim; ++cc)
                if (blk.f0(r, cc) != 0.0) os << "psd " << b << " -1 " << r << ' ' << cc << ' ' << blk.f0(r, cc) << '\n';
        for (const auto& [j, entries] : blk.coeffs)
            for (const auto& e : entries) os << "psd " << b << ' ' << j << ' ' << e.row << ' ' << e.col << ' ' << e.val << '\n';
    }
}

int ConicBuilder::add_linear(double a0, const std::vector<std::pair<int, double>>& coefs) {
    const int row = static_cast<int>(lin0_.size());
    lin0_.push_back(a0);
    for (const auto& [j, v] : coefs) lin_.emplace_back(row, j, v);
    return row;
}

int ConicBuilder::add_equality(double b, const std::vector<std::pair<int, double>>& coefs) {
    const int row = static_cast<int>(eq0_.size());
    eq0_.push_back(b);
    for (const auto& [j, v] : coefs) eq_.emplace_back(row, j, v);
    return row;
}

void ConicBuilder::add_soc(const std::vector<std::pair<double, std::vector<std::pair<int, double>>>>& rows) {
    SocBlock blk;
    blk.g0.resize(static_cast<Eigen::Index>(rows.size()));
    std::vector<Triplet> trip;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        blk.g0(static_cast<Eigen::Index>(r)) = rows[r].first;
        for (const auto& [j, v] : rows[r].second) trip.emplace_back(static_cast<int>(r), j, v);
    }
    blk.g.resize(static_cast<Eigen::Index>(rows.size()), prog_.n_vars);
    blk.g.setFromTriplets(trip.begin(), trip.end());
    prog_.soc.push_back(std::move(blk));
}

void ConicBuilder::finish() {
    prog_.lin.a.resize(static_cast<Eigen::Index>(lin0_.size()), prog_.n_vars);
    prog_.lin.a.setFromTriplets(lin_.begin(), lin_.end());
    prog_.lin.a0 = Eigen::Map<const VecR>(lin0_.data(), static_cast<Eigen::Index>(lin0_.size()));
    prog_.eq_a.resize(static_cast<Eigen::Index>(eq0_.size()), prog_.n_vars);
    prog_.eq_a.setFromTriplets(eq_.begin(), eq_.end());
    prog_.eq_b = Eigen::Map<const VecR>(eq0_.data(), static_cast<Eigen::Index>(eq0_.size()));
    for (auto& b : prog_.soc) b.g.conservativeResize(b.g.rows(), prog_.n_vars);
}

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::unbounded: return "unbounded";
        case SolveStatus::max_iter: return "max_iter";
    }
    return "unknown";
}

namespace {

struct PsdPrep {
    std::vector<int> dense;   // indices into coeffs
    std::vector<int> sparse;
    std::vector<MatR> dense_f;
};

// Cached per-program data that does not change along the path.
struct Prepared {
    const ConicProgram& p;
    std::vector<MatR> soc_gjg;
    std::vector<PsdPrep> psd;

    explicit Prepared(const ConicProgram& prog) : p(prog) {
        for (const auto& b : p.soc) {
            VecR jd = VecR::Constant(b.g.rows(), -1.0);
            jd(0) = 1.0;
            SpMat jg = jd.asDiagonal() * b.g;
            SpMat gjg = SpMat(b.g.transpose()) * jg;
            soc_gjg.push_back(MatR(gjg));
        }
        for (const auto& b : p.psd) {
            PsdPrep pr;
            for (int i = 0; i < static_cast<int>(b.coeffs.size()); ++i) {
                const auto& entries = b.coeffs[i].second;
                if (static_cast<int>(entries.size()) > b.dim) {
                    MatR f = MatR::Zero(b.dim, b.dim);
                    for (const auto& e : entries) f(e.row, e.col) += e.val;
                    pr.dense.push_back(i);
                    pr.dense_f.push_back(std::move(f));
                } else {
                    pr.sparse.push_back(i);
                }
            }
            psd.push_back(std::move(pr));
        }
    }
};

struct Slacks {
    VecR l;
    std::vector<VecR> s;
    std::vector<double> det;
    std::vector<Eigen::LLT<MatR>> chol;
};

MatR psd_matrix(const PsdBlock& b, const VecR& x) {
    MatR s = b.f0;
    for (const auto& [j, entries] : b.coeffs) {
        const double xj = x(j);
        if (xj == 0.0) continue;
        for (const auto& e : entries) s(e.row, e.col) += xj * e.val;
    }
    return s;
}

// Barrier value, or nullopt when x is not strictly inside every cone.
std::optional<double> barrier(const ConicProgram& p, const VecR& x, Slacks* out) {
    Slacks sl;
    double phi = 0.0;
    if (p.lin.a0.size() > 0) {
        sl.l = p.lin.a0 + p.lin.a * x;
        for (Eigen::Index i = 0; i < sl.l.size(); ++i) {
            if (!(sl.l(i) > 0.0)) return std::nullopt;
            phi -= std::log(sl.l(i));
        }
    }
    for (const auto& b : p.soc) {
        VecR s = b.g0 + b.g * x;
        const double tail = s.tail(s.size() - 1).norm();
        if (!(s(0) > tail)) return std::nullopt;
        const double det = (s(0) - tail) * (s(0) + tail);
        if (!(det > 0.0)) return std::nullopt;
        phi -= std::log(det);
        sl.s.push_back(std::move(s));
        sl.det.push_back(det);
    }
    for (const auto& b : p.psd) {
        Eigen::LLT<MatR> llt(psd_matrix(b, x));
        if (llt.info() != Eigen::Success) return std::nullopt;
        const VecR d = llt.matrixLLT().diagonal();
        for (Eigen::Index i = 0; i < d.size(); ++i) {
            if (!(d(i) > 0.0)) return std::nullopt;
            phi -= 2.0 * std::log(d(i));
        }
        sl.chol.push_back(std::move(llt));
    }
    if (!std::isfinite(phi)) return std::nullopt;
    if (out) *out = std::move(sl);
    return phi;
}

// Gradient and Hessian of the barrier at a strictly feasible point.
void barrier_derivs(const Prepared& pr, const Slacks& sl, VecR& g, MatR& h) {
    const ConicProgram& p = pr.p;
    const int n = p.n_vars;
    g = VecR::Zero(n);
    h = MatR::Zero(n, n);

    for (Eigen::Index r = 0; r < sl.l.size(); ++r) {
        const double inv = 1.0 / sl.l(r);
        const double inv2 = inv * inv;
        for (SpMat::InnerIterator a(p.lin.a, r); a; ++a) {
            g(a.col()) -= inv * a.value();
            for (SpMat::InnerIterator b(p.lin.a, r); b; ++b) h(a.col(), b.col()) += inv2 * a.value() * b.value();
        }
    }

    for (std::size_t k = 0; k < p.soc.size(); ++k) {
        VecR js = sl.s[k];
        js.tail(js.size() - 1) *= -1.0;
        const VecR w = p.soc[k].g.transpose() * js;
        const double det = sl.det[k];
        g -= (2.0 / det) * w;
        h -= (2.0 / det) * pr.soc_gjg[k];
        h.noalias() += (4.0 / (det * det)) * w * w.transpose();
    }

    for (std::size_t k = 0; k < p.psd.size(); ++k) {
        const auto& blk = p.psd[k];
        const auto& prep = pr.psd[k];
        const MatR sinv = sl.chol[k].solve(MatR::Identity(blk.dim, blk.dim));
        for (const auto& [j, entries] : blk.coeffs) {
            double acc = 0.0;
            for (const auto& e : entries) acc += e.val * sinv(e.col, e.row);
            g(j) -= acc;
        }
        for (std::size_t di = 0; di < prep.dense.size(); ++di) {
            const int vi = blk.coeffs[prep.dense[di]].first;
            const MatR w = sinv * prep.dense_f[di] * sinv;
            for (std::size_t q = 0; q < blk.coeffs.size(); ++q) {
                const auto& [vj, entries] = blk.coeffs[q];
                double acc = 0.0;
                for (const auto& e : entries) acc += e.val * w(e.col, e.row);
                h(vi, vj) += acc;
                const bool j_dense = std::binary_search(prep.dense.begin(), prep.dense.end(), static_cast<int>(q));
                if (!j_dense) h(vj, vi) += acc;
            }
        }
        for (int qi : prep.sparse) {
            const auto& [vi, ei] = blk.coeffs[qi];
            for (int qj : prep.sparse) {
                const auto& [vj, ej] = blk.coeffs[qj];
                double acc = 0.0;
                for (const auto& a : ei)
                    for (const auto& b : ej) acc += a.val * b.val * sinv(b.col, a.row) * sinv(a.col, b.row);
                h(vi, vj) += acc;
            }
        }
    }
}

enum class PathEnd { converged, stopped, unbounded, max_iter };

struct PathResult {
    PathEnd end = PathEnd::max_iter;
    double t = 1.0;
};

// Newton step for min t c^T x + phi(x) s.t. E dx = 0. The Hessian is
// Jacobi-scaled first: near the boundary its diagonal spans many decades and
// an unscaled ridge would flatten the weak directions.
bool newton_direction(const MatR& h, const VecR& grad, const MatR& e_dense, VecR& dx) {
    const Eigen::Index n = h.rows();
    const VecR d = h.diagonal().cwiseAbs().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    const MatR hs = d.asDiagonal() * h * d.asDiagonal();
    const VecR gs = d.cwiseProduct(grad);
    double ridge = 1e-14;
    for (int attempt = 0; attempt < 8; ++attempt) {
        MatR hr = hs;
        hr.diagonal().array() += ridge;
        Eigen::LLT<MatR> llt(hr);
        if (llt.info() == Eigen::Success) {
            const VecR hg = llt.solve(gs);
            VecR dy;
            if (e_dense.rows() == 0) {
                dy = -hg;
            } else {
                const MatR es = e_dense * d.asDiagonal();
                const MatR he = llt.solve(es.transpose());
                const MatR schur = es * he;
                const VecR w = schur.completeOrthogonalDecomposition().solve(-(es * hg));
                dy = -(hg + he * w);
            }
            dx = d.cwiseProduct(dy);
            if (dx.allFinite()) return true;
        }
        ridge *= 100.0;
    }
    dx = VecR::Zero(n);
    return false;
}

PathResult follow_path(const ConicProgram& p, VecR& x, const SolveOptions& opt, int& iters,
                       const std::function<bool(const VecR&)>& stop, double t0) {
    const Prepared pr(p);
    const MatR e_dense = MatR(p.eq_a);
    const double nu = p.barrier_degree();
    PathResult res;
    double t = t0;
    VecR g;
    MatR h;
    int budget = opt.max_iter;

    while (true) {
        // Centering.
        for (int inner = 0;; ++inner) {
            if (budget-- <= 0) {
                res.end = PathEnd::max_iter;
                res.t = t;
                return res;
            }
            ++iters;
            Slacks sl;
            const auto phi = barrier(p, x, &sl);
            if (!phi) {
                res.end = PathEnd::max_iter;
                res.t = t;
                return res;
            }
            barrier_derivs(pr, sl, g, h);
            const VecR grad = t * p.c + g;
            VecR dx;
            if (!newton_direction(h, grad, e_dense, dx)) break;
            const double dec = -grad.dot(dx);
            if (dec / 2.0 <= 1e-9) break;
            // Compare increments, not totals: t c^T x can dwarf the decrement.
            const double slope = t * p.c.dot(dx);
            double alpha = 1.0;
            bool moved = false;
            for (int ls = 0; ls < 80; ++ls, alpha *= 0.5) {
                const VecR xn = x + alpha * dx;
                const auto phin = barrier(p, xn, nullptr);
                if (!phin) continue;
                const double df = alpha * slope + (*phin - *phi);
                if (df <= -0.25 * alpha * dec) {
                    x = xn;
                    moved = true;
                    break;
                }
            }
            if (!moved) break;  // roundoff floor: treat as centered
            if (!x.allFinite() || x.norm() > opt.unbounded_norm) {
                res.end = PathEnd::unbounded;
                res.t = t;
                return res;
            }
            if (stop && stop(x)) {
                res.end = PathEnd::stopped;
                res.t = t;
                return res;
            }
        }
        res.t = t;
        if (stop && stop(x)) {
            res.end = PathEnd::stopped;
            return res;
        }
        if (nu / t <= opt.tol * (1.0 + std::abs(p.c.dot(x)))) {
            res.end = PathEnd::converged;
            return res;
        }
        t *= opt.mu;
    }
}

double max_violation(const ConicProgram& p, const VecR& x) {
    double v = 0.0;
    if (p.lin.a0.size() > 0) v = std::max(v, -(p.lin.a0 + p.lin.a * x).minCoeff());
    for (const auto& b : p.soc) {
        const VecR s = b.g0 + b.g * x;
        v = std::max(v, s.tail(s.size() - 1).norm() - s(0));
    }
    for (const auto& b : p.psd) {
        Eigen::SelfAdjointEigenSolver<MatR> es(psd_matrix(b, x), Eigen::EigenvaluesOnly);
        v = std::max(v, -es.eigenvalues()(0));
    }
    if (p.eq_b.size() > 0) v = std::max(v, (p.eq_a * x - p.eq_b).cwiseAbs().maxCoeff());
    return v;
}

// Phase I: min tau with every cone shifted by tau, tau >= -1.
// A wide norm ball keeps the phase I barrier bounded below.
ConicProgram phase_one_program(const ConicProgram& p, double radius) {
    ConicProgram q;
    q.n_vars = p.n_vars + 1;
    const int tau = p.n_vars;
    q.c = VecR::Zero(q.n_vars);
    q.c(tau) = 1.0;
    q.eq_a = p.eq_a;
    q.eq_a.conservativeResize(p.eq_a.rows(), q.n_vars);
    q.eq_b = p.eq_b;

    std::vector<Triplet> trip;
    const Eigen::Index m = p.lin.a0.size();
    for (Eigen::Index r = 0; r < m; ++r) {
        for (SpMat::InnerIterator it(p.lin.a, r); it; ++it) trip.emplace_back(static_cast<int>(r), it.col(), it.value());
        trip.emplace_back(static_cast<int>(r), tau, 1.0);
    }
    trip.emplace_back(static_cast<int>(m), tau, 1.0);
    q.lin.a.resize(m + 1, q.n_vars);
    q.lin.a.setFromTriplets(trip.begin(), trip.end());
    q.lin.a0.resize(m + 1);
    q.lin.a0.head(m) = p.lin.a0;
    q.lin.a0(m) = 1.0;

    for (const auto& b : p.soc) {
        SocBlock nb;
        nb.g0 = b.g0;
        std::vector<Triplet> t2;
        for (int r = 0; r < b.g.rows(); ++r)
            for (SpMat::InnerIterator it(b.g, r); it; ++it) t2.emplace_back(r, it.col(), it.value());
        t2.emplace_back(0, tau, 1.0);
        nb.g.resize(b.g.rows(), q.n_vars);
        nb.g.setFromTriplets(t2.begin(), t2.end());
        q.soc.push_back(std::move(nb));
    }
    {
        SocBlock ball;
        ball.g0 = VecR::Zero(q.n_vars + 1);
        ball.g0(0) = radius;
        std::vector<Triplet> t3;
        for (int j = 0; j < q.n_vars; ++j) t3.emplace_back(j + 1, j, 1.0);
        ball.g.resize(q.n_vars + 1, q.n_vars);
        ball.g.setFromTriplets(t3.begin(), t3.end());
        q.soc.push_back(std::move(ball));
    }
    for (const auto& b : p.psd) {
        PsdBlock nb = b;
        std::vector<SymEntry> eye;
        for (int i = 0; i < b.dim; ++i) eye.push_back({i, i, 1.0});
        nb.coeffs.emplace_back(tau, std::move(eye));
        q.psd.push_back(std::move(nb));
    }
    return q;
}

double initial_shift(const ConicProgram& p, const VecR& x) {
    double need = 0.0;
    if (p.lin.a0.size() > 0) need = std::max(need, -(p.lin.a0 + p.lin.a * x).minCoeff());
    for (const auto& b : p.soc) {
        const VecR s = b.g0 + b.g * x;
        need = std::max(need, s.tail(s.size() - 1).norm() - s(0));
    }
    for (const auto& b : p.psd) {
        Eigen::SelfAdjointEigenSolver<MatR> es(psd_matrix(b, x), Eigen::EigenvaluesOnly);
        need = std::max(need, -es.eigenvalues()(0));
    }
    return need + 1.0;
}

void fill_duals(const ConicProgram& p, const VecR& x, double t, ConicSolution& sol) {
    Slacks sl;
    barrier(p, x, &sl);
    VecR rd = p.c;
    double s0_dot = 0.0;
    if (p.lin.a0.size() > 0) {
        sol.z_lin = (t * sl.l).cwiseInverse();
        rd -= p.lin.a.transpose() * sol.z_lin;
        s0_dot += sol.z_lin.dot(p.lin.a0);
    }
    for (std::size_t k = 0; k < p.soc.size(); ++k) {
        VecR z = sl.s[k];
        z.tail(z.size() - 1) *= -1.0;
        z *= 2.0 / (t * sl.det[k]);
        rd -= p.soc[k].g.transpose() * z;
        s0_dot += z.dot(p.soc[k].g0);
        sol.z_soc.push_back(std::move(z));
    }
    for (std::size_t k = 0; k < p.psd.size(); ++k) {
        const auto& blk = p.psd[k];
        MatR z = sl.chol[k].solve(MatR::Identity(blk.dim, blk.dim)) / t;
        z = 0.5 * (z + z.transpose()).eval();
        for (const auto& [j, entries] : blk.coeffs) {
            double acc = 0.0;
            for (const auto& e : entries) acc += e.val * z(e.col, e.row);
            rd(j) -= acc;
        }
        s0_dot += (blk.f0.cwiseProduct(z)).sum();
        sol.z_psd.push_back(std::move(z));
    }
    double eq_term = 0.0;
    if (p.eq_b.size() > 0) {
        const MatR et = MatR(p.eq_a).transpose();
        sol.y_eq = et.completeOrthogonalDecomposition().solve(rd);
        rd -= et * sol.y_eq;
        eq_term = sol.y_eq.dot(p.eq_b);
    }
    sol.objective = p.c.dot(x);
    sol.dual_objective = -s0_dot + eq_term;
    sol.kkt.primal = max_violation(p, x);
    sol.kkt.dual = rd.norm() / (1.0 + p.c.norm());
    sol.kkt.gap = sol.objective - sol.dual_objective;
}

}  // namespace

ConicSolution solve(const ConicProgram& prog, const SolveOptions& opt) {
    prog.validate();
    ConicSolution sol;
    const int n = prog.n_vars;
    VecR x = VecR::Zero(n);
    const MatR e_dense = MatR(prog.eq_a);
    if (prog.eq_b.size() > 0) {
        x = e_dense.completeOrthogonalDecomposition().solve(prog.eq_b);
        if ((e_dense * x - prog.eq_b).norm() > 1e-8 * (1.0 + prog.eq_b.norm())) {
            sol.status = SolveStatus::infeasible;
            sol.x = x;
            return sol;
        }
    }

    const bool has_cones = prog.lin.a0.size() > 0 || !prog.soc.empty() || !prog.psd.empty();
    if (has_cones && !barrier(prog, x, nullptr)) {
        const ConicProgram p1 = phase_one_program(prog, 1e7 * (1.0 + x.norm()));
        VecR x1(n + 1);
        x1.head(n) = x;
        x1(n) = initial_shift(prog, x);
        const auto stop = [n](const VecR& v) { return v(n) < 0.0; };
        SolveOptions o1 = opt;
        const auto r1 = follow_path(p1, x1, o1, sol.iterations, stop, std::max(2.0, p1.barrier_degree()));
        x = x1.head(n);
        if (r1.end == PathEnd::converged || (r1.end == PathEnd::stopped && !barrier(prog, x, nullptr))) {
            sol.status = SolveStatus::infeasible;
            sol.x = x;
            return sol;
        }
        if (r1.end != PathEnd::stopped) {
            sol.status = r1.end == PathEnd::unbounded ? SolveStatus::infeasible : SolveStatus::max_iter;
            sol.x = x;
            return sol;
        }
    }

    if (!has_cones) {
        // Pure equality-constrained linear objective.
        const VecR proj = prog.c - e_dense.transpose() *
                                       e_dense.transpose().completeOrthogonalDecomposition().solve(prog.c);
        sol.x = x;
        sol.objective = prog.c.dot(x);
        sol.status = proj.norm() > 1e-12 * (1.0 + prog.c.norm()) ? SolveStatus::unbounded : SolveStatus::optimal;
        sol.dual_objective = sol.objective;
        return sol;
    }

    const double nu = prog.barrier_degree();
    const double t0 = std::max(1e-6, nu / (1.0 + std::abs(prog.c.dot(x))));
    const auto r2 = follow_path(prog, x, opt, sol.iterations, nullptr, t0);
    sol.x = x;
    if (r2.end == PathEnd::unbounded) {
        sol.status = SolveStatus::unbounded;
        sol.objective = prog.c.dot(x);
        return sol;
    }
    fill_duals(prog, x, r2.t, sol);
    sol.status = r2.end == PathEnd::converged ? SolveStatus::optimal : SolveStatus::max_iter;
    return sol;
}

MatR embed_hermitian(const MatC& h) {
    if (h.rows() != h.cols()) throw DimensionError("embed_hermitian: matrix must be square");
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    if (h.size() > 0 && (h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw DomainError("embed_hermitian: matrix is not Hermitian");
    const Eigen::Index n = h.rows();
    MatR out(2 * n, 2 * n);
    out.topLeftCorner(n, n) = h.real();
    out.topRightCorner(n, n) = -h.imag();
    out.bottomLeftCorner(n, n) = h.imag();
    out.bottomRightCorner(n, n) = h.real();
    return out;
}

MatC compress_hermitian(const MatR& x) {
    if (x.rows() != x.cols() || x.rows() % 2 != 0) throw DimensionError("compress_hermitian: need an even square matrix");
    const Eigen::Index n = x.rows() / 2;
    const MatR re = 0.5 * (x.topLeftCorner(n, n) + x.bottomRightCorner(n, n));
    const MatR im = 0.5 * (x.bottomLeftCorner(n, n) - x.topRightCorner(n, n));
    MatC h(n, n);
    h.real() = re;
    h.imag() = im;
    return 0.5 * (h + h.adjoint());
}

std::optional<VecC> extract_rank_one(const MatC& g, double rank_tol) {
    if (g.rows() != g.cols()) throw DimensionError("extract_rank_one: matrix must be square");
    const Eigen::Index n = g.rows();
    if (n == 0) return VecC();
    const MatC herm = 0.5 * (g + g.adjoint());
    Eigen::SelfAdjointEigenSolver<MatC> es(herm);
    const VecR& ev = es.eigenvalues();
    const double l1 = ev(n - 1);
    if (ev(0) < -1e-8 * std::max(1.0, std::abs(l1))) throw DomainError("extract_rank_one: matrix is indefinite");
    if (l1 <= 0.0) return VecC::Zero(n);
    const double l2 = n > 1 ? std::max(0.0, ev(n - 2)) : 0.0;
    if (l2 / l1 > rank_tol) return std::nullopt;
    VecC u = es.eigenvectors().col(n - 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(u(i)) > 1e-12) {
            u *= std::conj(u(i)) / std::abs(u(i));
            break;
        }
    }
    return VecC(std::sqrt(l1) * u);
}

HermitianVar HermitianVar::add(ConicProgram& prog, const std::string& name, int n) {
    HermitianVar h;
    h.n = n;
    h.offset = prog.add_variables(name, n * n);
    return h;
}

namespace {
int pair_index(int i, int j, int n) { return i * (2 * n - i - 1) / 2 + (j - i - 1); }
}  // namespace

int HermitianVar::re(int i, int j) const { return offset + n + pair_index(i, j, n); }
int HermitianVar::im(int i, int j) const { return offset + n + n * (n - 1) / 2 + pair_index(i, j, n); }

std::vector<std::pair<int, double>> HermitianVar::trace_coeffs(const MatC& a, double scale) const {
    if (a.rows() != n || a.cols() != n) throw DimensionError("trace_coeffs: size mismatch");
    std::vector<std::pair<int, double>> out;
    out.reserve(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i) out.emplace_back(diag(i), scale * a(i, i).real());
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) out.emplace_back(re(i, j), scale * (a(i, j) + a(j, i)).real());
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) out.emplace_back(im(i, j), scale * (a(i, j).imag() - a(j, i).imag()));
    return out;
}

void HermitianVar::entry_coeffs(int i, int j, cdouble w, std::vector<std::pair<int, double>>& re_part,
                                std::vector<std::pair<int, double>>& im_part) const {
    if (i == j) {
        re_part.emplace_back(diag(i), w.real());
        im_part.emplace_back(diag(i), w.imag());
        return;
    }
    const int lo = std::min(i, j);
    const int hi = std::max(i, j);
    const double sign = i < j ? 1.0 : -1.0;  // H(i,j) = a + j sign b
    re_part.emplace_back(re(lo, hi), w.real());
    re_part.emplace_back(im(lo, hi), -sign * w.imag());
    im_part.emplace_back(re(lo, hi), w.imag());
    im_part.emplace_back(im(lo, hi), sign * w.real());
}

void HermitianVar::add_psd(ConicProgram& prog, double scale) const {
    PsdBlock blk;
    blk.dim = 2 * n;
    blk.f0 = MatR::Zero(blk.dim, blk.dim);
    for (int i = 0; i < n; ++i) blk.coeffs.emplace_back(diag(i), std::vector<SymEntry>{{i, i, scale}, {n + i, n + i, scale}});
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            blk.coeffs.emplace_back(re(i, j), std::vector<SymEntry>{{i, j, scale},
                                                                    {j, i, scale},
                                                                    {n + i, n + j, scale},
                                                                    {n + j, n + i, scale}});
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            blk.coeffs.emplace_back(im(i, j), std::vector<SymEntry>{{i, n + j, -scale},
                                                                    {n + j, i, -scale},
                                                                    {j, n + i, scale},
                                                                    {n + i, j, scale}});
    prog.psd.push_back(std::move(blk));
}

MatC HermitianVar::value(const VecR& x) const {
    MatC h(n, n);
    for (int i = 0; i < n; ++i) h(i, i) = x(diag(i));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            h(i, j) = cdouble(x(re(i, j)), x(im(i, j)));
            h(j, i) = std::conj(h(i, j));
        }
    return h;
}

}  // namespace risac
