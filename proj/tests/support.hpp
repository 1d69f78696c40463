#pragma once

// Random inputs and brute-force reference implementations shared by the tests.
// The references work entry by entry and do not call the library's linear
// algebra.

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "ctckit/ctckit.hpp"

namespace ctckit::testing {

inline ComplexMatrix random_ginibre(SeededRng& rng, Index rows, Index cols) {
    ComplexMatrix g(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) g(i, j) = Complex(rng.normal(), rng.normal());
    return g;
}

// Full-rank mixed state (rank = dim unless rank is given).
inline DensityOperator random_density(SeededRng& rng, Index dim, Index rank = 0) {
    const ComplexMatrix g = random_ginibre(rng, dim, rank > 0 ? rank : dim);
    ComplexMatrix m = g * g.adjoint();
    m /= m.trace().real();
    return DensityOperator(m);
}

inline DensityOperator random_pure(SeededRng& rng, Index dim) {
    ComplexVector v = random_ginibre(rng, dim, 1).col(0);
    return DensityOperator::pure(v / v.norm());
}

// Haar-distributed unitary (QR of a Ginibre matrix with phases fixed).
inline ComplexMatrix random_unitary_matrix(SeededRng& rng, Index dim) {
    const ComplexMatrix g = random_ginibre(rng, dim, dim);
    Eigen::HouseholderQR<ComplexMatrix> qr(g);
    ComplexMatrix q = qr.householderQ();
    const ComplexMatrix r = qr.matrixQR();
    for (Index j = 0; j < dim; ++j) {
        const Complex d = r(j, j);
        q.col(j) *= d / std::abs(d);
    }
    return q;
}

inline UnitaryGate random_unitary(SeededRng& rng, Index d1, Index d2) {
    return UnitaryGate::from_matrix(d1, d2, random_unitary_matrix(rng, d1 * d2));
}

inline std::vector<Index> random_permutation(SeededRng& rng, Index n) {
    std::vector<Index> p(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
    for (std::size_t i = p.size(); i > 1; --i) std::swap(p[i - 1], p[rng.below(i)]);
    return p;
}

// ---------------------------------------------------------------------------
// Brute-force references

inline ComplexMatrix ref_kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix m(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            for (Index k = 0; k < b.rows(); ++k)
                for (Index l = 0; l < b.cols(); ++l) m(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
    return m;
}

// sum_i (<i| (x) I) m (|i> (x) I)
inline ComplexMatrix ref_partial_trace_1(const ComplexMatrix& m, Index d1, Index d2) {
    ComplexMatrix r = ComplexMatrix::Zero(d2, d2);
    for (Index a = 0; a < d2; ++a)
        for (Index b = 0; b < d2; ++b)
            for (Index i = 0; i < d1; ++i) r(a, b) += m(i * d2 + a, i * d2 + b);
    return r;
}

inline ComplexMatrix ref_partial_trace_2(const ComplexMatrix& m, Index d1, Index d2) {
    ComplexMatrix r = ComplexMatrix::Zero(d1, d1);
    for (Index a = 0; a < d1; ++a)
        for (Index b = 0; b < d1; ++b)
            for (Index j = 0; j < d2; ++j) r(a, b) += m(a * d2 + j, b * d2 + j);
    return r;
}

inline ComplexMatrix ref_conjugate(const ComplexMatrix& u, const ComplexMatrix& m) {
    const Index n = u.rows();
    ComplexMatrix t = ComplexMatrix::Zero(n, n), r = ComplexMatrix::Zero(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            for (Index k = 0; k < n; ++k) t(i, j) += u(i, k) * m(k, j);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            for (Index k = 0; k < n; ++k) r(i, j) += t(i, k) * std::conj(u(j, k));
    return r;
}

inline ComplexMatrix ref_time_traveller_map(const UnitaryGate& u, const ComplexMatrix& rho, const ComplexMatrix& sigma) {
    return ref_partial_trace_1(ref_conjugate(u.matrix(), ref_kron(rho, sigma)), u.dim1(), u.dim2());
}

inline ComplexMatrix ref_output_map(const UnitaryGate& u, const ComplexMatrix& rho, const ComplexMatrix& sigma) {
    return ref_partial_trace_2(ref_conjugate(u.matrix(), ref_kron(rho, sigma)), u.dim1(), u.dim2());
}

// Trace distance via the library's eigen solver is avoided: for Hermitian
// differences the trace norm equals the sum of singular values.
inline double ref_trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
    Eigen::JacobiSVD<ComplexMatrix> svd(a - b);
    return 0.5 * svd.singularValues().sum();
}

// Restarted-block Cesaro means of the map itself, working on matrices: average
// blocks of 16, 32, 64, ... iterates, each block starting from the previous
// average, until the average is a fixed point to within tol.
inline ComplexMatrix ref_cesaro_fixed_point(const UnitaryGate& u, const ComplexMatrix& rho, ComplexMatrix start,
                                            double tol = 1e-12, Index max_iters = 400000) {
    Index used = 0;
    Index block = 16;
    ComplexMatrix avg = start;
    while (used < max_iters) {
        ComplexMatrix it = avg, sum = ComplexMatrix::Zero(avg.rows(), avg.cols());
        for (Index n = 0; n < block; ++n) {
            sum += it;
            it = ref_time_traveller_map(u, rho, it);
        }
        used += block;
        avg = sum / static_cast<double>(block);
        if (ref_trace_distance(ref_time_traveller_map(u, rho, avg), avg) <= tol) break;
        block = std::min<Index>(2 * block, 4096);
    }
    return avg;
}

// Closed-form component equations for the example gate, with the
// non-time-traveller a product rho_a (x) rho_b of qubits. Components are
// 0-based here.
inline Complex example_sigma_00(const ComplexMatrix& ra, const ComplexMatrix& rb, const ComplexMatrix& s) {
    return rb(0, 0) + ra(0, 0) * (2.0 * rb(0, 0) - 1.0) * (s(0, 0) - 1.0);
}

inline Complex example_sigma_01(const ComplexMatrix& ra, const ComplexMatrix& rb, const ComplexMatrix& s) {
    return rb(0, 0) * ra(1, 0) * s(0, 1) + ra(0, 0) * rb(1, 1) * s(1, 0) + rb(0, 1) * (s(1, 1) * ra(1, 1) + ra(0, 1) * s(0, 0));
}

inline Complex example_rho_hat_00(const ComplexMatrix& ra, const ComplexMatrix& rb, const ComplexMatrix& s) {
    return rb(0, 0) * (ra(0, 0) + s(0, 0) - 2.0 * ra(0, 0) * s(0, 0));
}

// rho^A, rho^B, rho^C for the example gate.
inline DensityOperator example_rho_a(double eps) {
    return kron(DensityOperator::diagonal({1.0, 0.0}), DensityOperator::diagonal({1.0 - eps, eps}));
}
inline DensityOperator example_rho_b() { return DensityOperator::basis_state(4, 0); }
inline DensityOperator example_rho_c(double eps) {
    return kron(DensityOperator::diagonal({1.0 - eps, eps}), DensityOperator::diagonal({1.0, 0.0}));
}

// ---------------------------------------------------------------------------
// Feasible points of a fixed-point set

// Largest t with particular + t * dir PSD, by bisection on the eigenvalues.
inline double max_extent(const FixedPointSet& f, const RealVector& dir) {
    auto ok = [&](double t) { return hermitian_eigenvalues(f.point(t * dir)).minCoeff() >= 0.0; };
    double lo = 0.0, hi = 1.0;
    while (ok(hi) && hi < 64.0) hi *= 2.0;
    if (!ok(lo)) return 0.0;
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? lo : hi) = mid;
    }
    return lo;
}

// Random member of Q: a random direction from the particular solution, a
// uniformly random fraction of the feasible extent.
inline RealVector random_feasible_coordinates(SeededRng& rng, const FixedPointSet& f) {
    RealVector d(f.k());
    for (Index i = 0; i < f.k(); ++i) d(i) = rng.normal();
    d.normalize();
    return rng.uniform() * max_extent(f, d) * d;
}

// ---------------------------------------------------------------------------
// Process helpers for CLI tests

struct CommandResult {
    int exit_code = -1;
    std::string out;
};

inline CommandResult run_command(const std::string& cmd) {
    CommandResult r;
    FILE* p = popen((cmd + " 2>/dev/null").c_str(), "r");
    if (!p) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int status = pclose(p);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

inline std::string cli() { return CTCKIT_CLI_PATH; }
inline std::string source_path(const std::string& rel) { return std::string(CTCKIT_SOURCE_DIR) + "/" + rel; }

inline std::filesystem::path temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("ctckit_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace ctckit::testing
