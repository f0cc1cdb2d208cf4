#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace risac {

using cdouble = std::complex<double>;

using VecC = Eigen::VectorXcd;
using MatC = Eigen::MatrixXcd;
using RowC = Eigen::RowVectorXcd;
using VecR = Eigen::VectorXd;
using MatR = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;
inline const cdouble kJ{0.0, 1.0};

/// Thrown for out-of-domain arguments (non-positive distance, bad probability, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Thrown when operand dimensions do not agree.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Deterministic random stream. Every Monte Carlo worker owns one.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix(seed)) {}

    /// Independent stream derived from a base seed and a stream index.
    static Rng stream(std::uint64_t seed, std::uint64_t index) {
        return Rng(seed ^ mix(index + 0x9e3779b97f4a7c15ULL));
    }

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
    int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

    /// Standard circularly-symmetric complex Gaussian, E|z|^2 = 1.
    cdouble cscg() {
        constexpr double s = 0.70710678118654752440;
        const double re = normal();
        const double im = normal();
        return {s * re, s * im};
    }

    VecC cscg_vector(Eigen::Index n) {
        VecC v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = cscg();
        return v;
    }

    MatC cscg_matrix(Eigen::Index rows, Eigen::Index cols) {
        MatC m(rows, cols);
        for (Eigen::Index c = 0; c < cols; ++c)
            for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = cscg();
        return m;
    }

    std::mt19937_64& engine() { return engine_; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::mt19937_64 engine_;
};

/// Transmit beam matrix S (N x K) and RIS phase vector theta (M).
struct BeamformerSet {
    MatC s_tx;
    VecC theta;

    double power() const { return s_tx.squaredNorm(); }
};

}  // namespace risac
