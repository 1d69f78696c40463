#pragma once

// Dense complex matrices, density operators, unitary gates on a bipartite
// space H1 (x) H2, and the handful of quantum-information primitives the rest
// of the library is built from.
//
// Composite basis convention: index = i1 * dim2 + i2, i.e. the first factor is
// the slow index. Every module relies on this.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ctckit/errors.hpp"

namespace ctckit {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

namespace tol {
inline constexpr double kHermitian = 1e-12;
inline constexpr double kTrace = 1e-12;
inline constexpr double kPsd = 1e-10;
inline constexpr double kUnitary = 1e-12;
inline constexpr double kBloch = 1e-12;
}  // namespace tol

namespace detail {

inline std::string dims_string(Index r, Index c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace detail

inline bool all_finite(const ComplexMatrix& m) {
    for (Index j = 0; j < m.cols(); ++j)
        for (Index i = 0; i < m.rows(); ++i)
            if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
    return true;
}

inline double max_abs_entry(const ComplexMatrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double hermiticity_error(const ComplexMatrix& m) {
    return max_abs_entry(m - m.adjoint());
}

// Eigenvalues (ascending) of the Hermitian part of m.
inline RealVector hermitian_eigenvalues(const ComplexMatrix& m) {
    const ComplexMatrix h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

// Half the trace norm of a Hermitian matrix.
inline double half_trace_norm(const ComplexMatrix& m) {
    return 0.5 * hermitian_eigenvalues(m).cwiseAbs().sum();
}

// Hermitian, unit trace, positive semidefinite. Immutable once constructed.
class DensityOperator {
public:
    explicit DensityOperator(ComplexMatrix m) {
        if (m.rows() != m.cols() || m.rows() == 0)
            throw DimensionError("density operator must be a non-empty square matrix, got " +
                                 detail::dims_string(m.rows(), m.cols()));
        if (!all_finite(m)) throw InvalidStateError("density operator has non-finite entries");
        const double herm = hermiticity_error(m);
        if (herm > tol::kHermitian)
            throw InvalidStateError("density operator is not Hermitian (error " + std::to_string(herm) + ")");
        m = 0.5 * (m + m.adjoint()).eval();
        const double tr_err = std::abs(m.trace() - Complex(1.0, 0.0));
        if (tr_err > tol::kTrace)
            throw InvalidStateError("density operator trace differs from 1 by " + std::to_string(tr_err));
        const double min_eig = hermitian_eigenvalues(m).minCoeff();
        if (min_eig < -tol::kPsd)
            throw InvalidStateError("density operator has negative eigenvalue " + std::to_string(min_eig));
        m_ = std::move(m);
    }

    static DensityOperator maximally_mixed(Index dim) {
        return DensityOperator(ComplexMatrix::Identity(dim, dim) / static_cast<double>(dim));
    }

    static DensityOperator basis_state(Index dim, Index i) {
        if (i < 0 || i >= dim) throw DimensionError("basis index out of range");
        ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
        m(i, i) = 1.0;
        return DensityOperator(std::move(m));
    }

    // |psi><psi| / <psi|psi>.
    static DensityOperator pure(const ComplexVector& psi) {
        const double n = psi.norm();
        if (n == 0.0 || !std::isfinite(n)) throw InvalidStateError("cannot normalise a zero state vector");
        const ComplexVector v = psi / n;
        return DensityOperator(v * v.adjoint());
    }

    static DensityOperator diagonal(const std::vector<double>& probs) {
        ComplexMatrix m = ComplexMatrix::Zero(static_cast<Index>(probs.size()), static_cast<Index>(probs.size()));
        for (std::size_t i = 0; i < probs.size(); ++i) m(static_cast<Index>(i), static_cast<Index>(i)) = probs[i];
        return DensityOperator(std::move(m));
    }

    Index dim() const noexcept { return m_.rows(); }
    const ComplexMatrix& matrix() const noexcept { return m_; }
    Complex operator()(Index i, Index j) const { return m_(i, j); }
    RealVector eigenvalues() const { return hermitian_eigenvalues(m_); }

private:
    ComplexMatrix m_;
};

// lambda * a + (1 - lambda) * b.
inline DensityOperator mix(const DensityOperator& a, const DensityOperator& b, double lambda) {
    if (a.dim() != b.dim()) throw DimensionError("mix: dimension mismatch");
    return DensityOperator(lambda * a.matrix() + (1.0 - lambda) * b.matrix());
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline DensityOperator kron(const DensityOperator& a, const DensityOperator& b) {
    return DensityOperator(kron(a.matrix(), b.matrix()));
}

// Tr_1: traces out the first (slow-index) factor, leaving a dim2 x dim2 matrix.
inline ComplexMatrix partial_trace_1(const ComplexMatrix& m, Index dim1, Index dim2) {
    if (dim1 <= 0 || dim2 <= 0 || m.rows() != dim1 * dim2 || m.cols() != dim1 * dim2)
        throw DimensionError("partial_trace_1: expected " + detail::dims_string(dim1 * dim2, dim1 * dim2) +
                             " matrix, got " + detail::dims_string(m.rows(), m.cols()));
    ComplexMatrix out = ComplexMatrix::Zero(dim2, dim2);
    for (Index i = 0; i < dim1; ++i) out += m.block(i * dim2, i * dim2, dim2, dim2);
    return out;
}

// Tr_2: traces out the second (fast-index) factor, leaving a dim1 x dim1 matrix.
inline ComplexMatrix partial_trace_2(const ComplexMatrix& m, Index dim1, Index dim2) {
    if (dim1 <= 0 || dim2 <= 0 || m.rows() != dim1 * dim2 || m.cols() != dim1 * dim2)
        throw DimensionError("partial_trace_2: expected " + detail::dims_string(dim1 * dim2, dim1 * dim2) +
                             " matrix, got " + detail::dims_string(m.rows(), m.cols()));
    ComplexMatrix out(dim1, dim1);
    for (Index i = 0; i < dim1; ++i)
        for (Index k = 0; k < dim1; ++k) out(i, k) = m.block(i * dim2, k * dim2, dim2, dim2).trace();
    return out;
}

// Entropy in nats. Eigenvalues are clipped to [0, 1] first, and 0 ln 0 = 0.
inline double von_neumann_entropy(const ComplexMatrix& m) {
    const RealVector ev = hermitian_eigenvalues(m);
    double s = 0.0;
    for (Index i = 0; i < ev.size(); ++i) {
        const double p = std::clamp(ev(i), 0.0, 1.0);
        if (p > 0.0) s -= p * std::log(p);
    }
    return s;
}

inline double von_neumann_entropy(const DensityOperator& s) { return von_neumann_entropy(s.matrix()); }

inline double trace_distance(const DensityOperator& a, const DensityOperator& b) {
    if (a.dim() != b.dim())
        throw DimensionError("trace_distance: dimensions " + std::to_string(a.dim()) + " and " +
                             std::to_string(b.dim()) + " differ");
    return half_trace_norm(a.matrix() - b.matrix());
}

// ---------------------------------------------------------------------------
// Qubits and the Bloch ball

struct BlochVector {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

namespace pauli {
inline ComplexMatrix x() {
    ComplexMatrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}
inline ComplexMatrix y() {
    ComplexMatrix m(2, 2);
    m << 0, Complex(0, -1), Complex(0, 1), 0;
    return m;
}
inline ComplexMatrix z() {
    ComplexMatrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}
}  // namespace pauli

inline BlochVector to_bloch(const DensityOperator& s) {
    if (s.dim() != 2) throw DimensionError("to_bloch requires a qubit state, got dim " + std::to_string(s.dim()));
    return {2.0 * s(0, 1).real(), -2.0 * s(0, 1).imag(), (s(0, 0) - s(1, 1)).real()};
}

// s = (I + x X + y Y + z Z) / 2.
inline DensityOperator from_bloch(const BlochVector& v) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z))
        throw InvalidStateError("Bloch vector has non-finite components");
    if (v.norm() > 1.0 + tol::kBloch)
        throw InvalidStateError("Bloch vector lies outside the unit ball (|v| = " + std::to_string(v.norm()) + ")");
    ComplexMatrix m = 0.5 * (ComplexMatrix::Identity(2, 2) + v.x * pauli::x() + v.y * pauli::y() + v.z * pauli::z());
    return DensityOperator(std::move(m));
}

// ---------------------------------------------------------------------------
// Unitary interaction between the non-time-traveller (H1) and the
// time-traveller (H2).

class UnitaryGate {
public:
    static UnitaryGate from_matrix(Index dim1, Index dim2, ComplexMatrix m) {
        check_dims(dim1, dim2);
        const Index n = dim1 * dim2;
        if (m.rows() != n || m.cols() != n)
            throw DimensionError("gate matrix must be " + detail::dims_string(n, n) + ", got " +
                                 detail::dims_string(m.rows(), m.cols()));
        if (!all_finite(m)) throw InvalidStateError("gate matrix has non-finite entries");
        const double err = max_abs_entry(m * m.adjoint() - ComplexMatrix::Identity(n, n));
        if (err > tol::kUnitary)
            throw InvalidStateError("gate matrix is not unitary (max |UU^dag - I| = " + std::to_string(err) + ")");
        return UnitaryGate(dim1, dim2, std::move(m), std::nullopt);
    }

    // perm[i] is the image of basis vector |i>: U|i> = |perm[i]>.
    static UnitaryGate from_permutation(Index dim1, Index dim2, std::vector<Index> perm) {
        check_dims(dim1, dim2);
        const Index n = dim1 * dim2;
        if (static_cast<Index>(perm.size()) != n)
            throw DimensionError("permutation must have " + std::to_string(n) + " entries, got " +
                                 std::to_string(perm.size()));
        std::vector<bool> seen(static_cast<std::size_t>(n), false);
        for (Index p : perm) {
            if (p < 0 || p >= n || seen[static_cast<std::size_t>(p)])
                throw InvalidStateError("permutation is not a bijection on 0.." + std::to_string(n - 1));
            seen[static_cast<std::size_t>(p)] = true;
        }
        ComplexMatrix m = ComplexMatrix::Zero(n, n);
        for (Index i = 0; i < n; ++i) m(perm[static_cast<std::size_t>(i)], i) = 1.0;
        return UnitaryGate(dim1, dim2, std::move(m), std::move(perm));
    }

    static UnitaryGate identity(Index dim1, Index dim2) {
        std::vector<Index> perm(static_cast<std::size_t>(dim1 * dim2));
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<Index>(i);
        return from_permutation(dim1, dim2, std::move(perm));
    }

    // |i1 i2> -> |i2 i1> on a d x d system.
    static UnitaryGate swap(Index d) {
        std::vector<Index> perm(static_cast<std::size_t>(d * d));
        for (Index i1 = 0; i1 < d; ++i1)
            for (Index i2 = 0; i2 < d; ++i2) perm[static_cast<std::size_t>(i1 * d + i2)] = i2 * d + i1;
        return from_permutation(d, d, std::move(perm));
    }

    Index dim1() const noexcept { return dim1_; }
    Index dim2() const noexcept { return dim2_; }
    Index dim() const noexcept { return dim1_ * dim2_; }
    const ComplexMatrix& matrix() const noexcept { return m_; }
    const std::optional<std::vector<Index>>& permutation() const noexcept { return perm_; }
    bool is_permutation() const noexcept { return perm_.has_value(); }

private:
    UnitaryGate(Index dim1, Index dim2, ComplexMatrix m, std::optional<std::vector<Index>> perm)
        : dim1_(dim1), dim2_(dim2), m_(std::move(m)), perm_(std::move(perm)) {}

    static void check_dims(Index dim1, Index dim2) {
        if (dim1 <= 0 || dim2 <= 0) throw DimensionError("gate factor dimensions must be positive");
    }

    Index dim1_;
    Index dim2_;
    ComplexMatrix m_;
    std::optional<std::vector<Index>> perm_;
};

// Controlled swap followed by two controlled NOTs on three qubits (a, b | c),
// with (a, b) the non-time-traveller and c the time-traveller. Basis images of
// |000>..|111> under index 4a + 2b + c.
inline const std::vector<Index>& example_discontinuous_permutation() {
    static const std::vector<Index> perm{4, 1, 3, 2, 0, 6, 5, 7};
    return perm;
}

inline UnitaryGate example_discontinuous_gate() {
    return UnitaryGate::from_permutation(4, 2, example_discontinuous_permutation());
}

}  // namespace ctckit
