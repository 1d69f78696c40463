#pragma once

// The consistency map sigma -> Tr_1(U (rho (x) sigma) U^dag), the output map
// rho -> Tr_2(U (rho (x) sigma) U^dag), and an exact description of the set of
// consistent time-traveller states Q_U(rho) as an affine subspace of the
// Hermitian matrices intersected with the density-operator cone.

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ctckit/core.hpp"
#include "ctckit/hermitian_basis.hpp"

namespace ctckit {

namespace detail {

inline void check_scenario_dims(const UnitaryGate& u, Index rho_dim, Index sigma_dim, const char* where) {
    if (rho_dim != u.dim1() || sigma_dim != u.dim2())
        throw DimensionError(std::string(where) + ": gate acts on " + std::to_string(u.dim1()) + " x " +
                             std::to_string(u.dim2()) + " but states have dims " + std::to_string(rho_dim) +
                             " and " + std::to_string(sigma_dim));
}

// U (rho (x) x) U^dag for arbitrary (not necessarily positive) x.
inline ComplexMatrix conjugated_product(const UnitaryGate& u, const ComplexMatrix& rho, const ComplexMatrix& x) {
    const ComplexMatrix joint = kron(rho, x);
    if (const auto& perm = u.permutation()) {
        const Index n = u.dim();
        ComplexMatrix out(n, n);
        for (Index j = 0; j < n; ++j)
            for (Index i = 0; i < n; ++i)
                out((*perm)[static_cast<std::size_t>(i)], (*perm)[static_cast<std::size_t>(j)]) = joint(i, j);
        return out;
    }
    return u.matrix() * joint * u.matrix().adjoint();
}

}  // namespace detail

// Linear extension of the consistency map to arbitrary dim2 x dim2 matrices.
inline ComplexMatrix time_traveller_output(const UnitaryGate& u, const ComplexMatrix& rho, const ComplexMatrix& x) {
    detail::check_scenario_dims(u, rho.rows(), x.rows(), "time_traveller_output");
    return partial_trace_1(detail::conjugated_product(u, rho, x), u.dim1(), u.dim2());
}

inline ComplexMatrix non_time_traveller_output(const UnitaryGate& u, const ComplexMatrix& rho, const ComplexMatrix& x) {
    detail::check_scenario_dims(u, rho.rows(), x.rows(), "non_time_traveller_output");
    return partial_trace_2(detail::conjugated_product(u, rho, x), u.dim1(), u.dim2());
}

inline DensityOperator deutsch_map(const UnitaryGate& u, const DensityOperator& rho, const DensityOperator& sigma) {
    return DensityOperator(time_traveller_output(u, rho.matrix(), sigma.matrix()));
}

inline DensityOperator evolve_out(const UnitaryGate& u, const DensityOperator& rho, const DensityOperator& sigma) {
    return DensityOperator(non_time_traveller_output(u, rho.matrix(), sigma.matrix()));
}

// x -> linear * x + offset on real coordinate vectors.
struct AffineMapReal {
    RealMatrix linear;
    RealVector offset;

    Index dim_in() const noexcept { return linear.cols(); }
    Index dim_out() const noexcept { return linear.rows(); }
    RealVector operator()(const RealVector& x) const { return linear * x + offset; }
};

// The consistency map in traceless coordinates: with
// sigma = I/d2 + sum_i x_i B_i, the map becomes x -> M x + c.
inline AffineMapReal build_superoperator(const UnitaryGate& u, const DensityOperator& rho) {
    detail::check_scenario_dims(u, rho.dim(), u.dim2(), "build_superoperator");
    const Index d2 = u.dim2();
    const HermitianBasis basis(d2);
    const Index n = basis.traceless_size();
    AffineMapReal map{RealMatrix(n, n), RealVector(n)};
    const ComplexMatrix centre = ComplexMatrix::Identity(d2, d2) / static_cast<double>(d2);
    map.offset = basis.traceless_coordinates(time_traveller_output(u, rho.matrix(), centre));
    for (Index i = 0; i < n; ++i)
        map.linear.col(i) = basis.traceless_coordinates(time_traveller_output(u, rho.matrix(), basis[i + 1]));
    return map;
}

struct FixedPointOptions {
    double sv_tol = 1e-9;
    double residual_tol = 1e-10;
    Index cesaro_max_iters = 100000;
    double cesaro_tol = 1e-12;
    // Singular values within this factor of sv_tol produce a warning.
    double near_threshold_factor = 1e3;
};

struct CesaroResult {
    RealVector x;
    Index iterations = 0;
    double residual = 0.0;  // |F(x) - x| in coordinate norm
};

// Running means of the iterates of an affine map, restarted from the previous
// mean with doubling block lengths. Each block mean is a polynomial in the map
// that fixes its fixed points and strictly contracts everything else, so the
// restarts converge to the same limit as the plain Cesaro means.
inline CesaroResult cesaro_average(const AffineMapReal& map, RealVector x0, Index max_iters, double tol) {
    CesaroResult r{std::move(x0), 0, 0.0};
    r.residual = (map(r.x) - r.x).norm();
    Index block = 16;
    RealVector it(r.x.size());
    RealVector next(r.x.size());
    RealVector sum(r.x.size());
    while (r.residual > tol && r.iterations < max_iters) {
        const Index n = std::min(block, max_iters - r.iterations);
        it = r.x;
        sum.setZero();
        for (Index k = 0; k < n; ++k) {
            sum += it;
            next.noalias() = map.linear * it;
            next += map.offset;
            it.swap(next);
        }
        r.x = sum / static_cast<double>(n);
        r.iterations += n;
        r.residual = (map(r.x) - r.x).norm();
        block *= 2;
    }
    return r;
}

// Q_U(rho) = { particular + sum_i y_i basis_i  :  result is PSD }.
struct FixedPointSet {
    UnitaryGate gate;
    DensityOperator rho;
    AffineMapReal map;
    DensityOperator particular;
    RealVector particular_coordinates;
    // Columns are the traceless coordinates of the basis matrices (orthonormal).
    RealMatrix basis_coordinates;
    std::vector<ComplexMatrix> basis;
    RealVector singular_values;  // of M - I, descending
    double map_residual = 0.0;   // trace distance between deutsch_map(particular) and particular
    double cesaro_residual = 0.0;
    Index cesaro_iterations = 0;
    std::vector<std::string> warnings;
    FixedPointOptions options;

    Index dim2() const noexcept { return particular.dim(); }
    Index k() const noexcept { return static_cast<Index>(basis.size()); }

    // particular + sum_i y_i basis_i; not necessarily positive.
    ComplexMatrix point(const RealVector& y) const {
        if (y.size() != k()) throw DimensionError("FixedPointSet::point: expected " + std::to_string(k()) + " coordinates");
        ComplexMatrix m = particular.matrix();
        for (Index i = 0; i < k(); ++i) m += y(i) * basis[static_cast<std::size_t>(i)];
        return m;
    }
};

namespace detail {

// Flip v so its largest-magnitude component is positive.
inline void canonical_sign(Eigen::Ref<RealVector> v) {
    Index arg = 0;
    for (Index i = 1; i < v.size(); ++i)
        if (std::abs(v(i)) > std::abs(v(arg)) + 1e-12) arg = i;
    if (v(arg) < 0) v = -v;
}

// Exact limit of the Cesaro means of x -> Mx + c started at x0: the spectral
// projector of the augmented map onto its eigenvalue-1 eigenspace.
inline std::optional<RealVector> spectral_cesaro_limit(const AffineMapReal& map, const RealVector& x0, double sv_tol) {
    const Index n = map.dim_in();
    RealMatrix t = RealMatrix::Zero(n + 1, n + 1);
    t.topLeftCorner(n, n) = map.linear;
    t.topRightCorner(n, 1) = map.offset;
    t(n, n) = 1.0;
    const RealMatrix a = t - RealMatrix::Identity(n + 1, n + 1);
    Eigen::JacobiSVD<RealMatrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RealVector& s = svd.singularValues();
    Index rank = 0;
    while (rank < s.size() && s(rank) > sv_tol) ++rank;
    RealMatrix frame(n + 1, n + 1);
    frame.leftCols(n + 1 - rank) = svd.matrixV().rightCols(n + 1 - rank);  // kernel
    frame.rightCols(rank) = svd.matrixU().leftCols(rank);                 // range
    RealVector v0(n + 1);
    v0.head(n) = x0;
    v0(n) = 1.0;
    Eigen::FullPivLU<RealMatrix> lu(frame);
    if (!lu.isInvertible()) return std::nullopt;
    const RealVector coef = lu.solve(v0);
    const RealVector lim = frame.leftCols(n + 1 - rank) * coef.head(n + 1 - rank);
    if (std::abs(lim(n)) < 1e-8) return std::nullopt;
    return RealVector(lim.head(n) / lim(n));
}

}  // namespace detail

// Particular solution: Cesaro averaging from I/d2, refined by a least-squares
// solve of (M - I) x = -c. Fixed directions: null space of M - I.
inline FixedPointSet fixed_point_set(const UnitaryGate& u, const DensityOperator& rho, const FixedPointOptions& opt = {}) {
    detail::check_scenario_dims(u, rho.dim(), u.dim2(), "fixed_point_set");
    const Index d2 = u.dim2();
    const HermitianBasis hb(d2);
    AffineMapReal map = build_superoperator(u, rho);
    const Index n = map.dim_in();
    std::vector<std::string> warnings;

    const CesaroResult ces = cesaro_average(map, RealVector::Zero(n), opt.cesaro_max_iters, opt.cesaro_tol);

    const RealMatrix a = map.linear - RealMatrix::Identity(n, n);
    RealVector x = ces.x;
    RealVector sv(0);
    RealMatrix null_basis(n, 0);
    if (n > 0) {
        Eigen::JacobiSVD<RealMatrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
        sv = svd.singularValues();
        Index rank = 0;
        while (rank < sv.size() && sv(rank) > opt.sv_tol) ++rank;
        for (Index i = 0; i < sv.size(); ++i) {
            const double s = sv(i);
            if (s > opt.sv_tol / opt.near_threshold_factor && s < opt.sv_tol * opt.near_threshold_factor)
                warnings.push_back("singular value " + std::to_string(s) + " is close to sv_tol");
        }
        const RealVector rhs = -map.offset - a * x;
        const RealVector proj = svd.matrixU().leftCols(rank).transpose() * rhs;
        x += svd.matrixV().leftCols(rank) * (proj.array() / sv.head(rank).array()).matrix();
        null_basis = svd.matrixV().rightCols(n - rank);
        for (Index j = 0; j < null_basis.cols(); ++j) detail::canonical_sign(null_basis.col(j));
    }

    auto min_eig = [&](const RealVector& coords) { return hermitian_eigenvalues(hb.from_traceless(coords)).minCoeff(); };
    if (n > 0 && min_eig(x) < -tol::kPsd) {
        // The least-squares correction left the cone: the Cesaro stage had not
        // converged along a slowly mixing direction. Use the exact limit.
        if (auto lim = detail::spectral_cesaro_limit(map, RealVector::Zero(n), opt.sv_tol)) {
            warnings.push_back("Cesaro stage unconverged; used exact spectral limit");
            x = *lim;
        }
        if (min_eig(x) < -tol::kPsd)
            throw SolverDiagnostic("fixed_point_set: particular solution left the density-operator cone (min eigenvalue " +
                                   std::to_string(min_eig(x)) + ")");
    }

    ComplexMatrix sigma0 = hb.from_traceless(x);
    DensityOperator particular(std::move(sigma0));
    const double residual = half_trace_norm(time_traveller_output(u, rho.matrix(), particular.matrix()) - particular.matrix());
    if (residual > opt.residual_tol)
        throw SolverDiagnostic("fixed_point_set: map residual " + std::to_string(residual) + " exceeds residual_tol");

    std::vector<ComplexMatrix> basis;
    for (Index j = 0; j < null_basis.cols(); ++j) basis.push_back(hb.combine_traceless(null_basis.col(j)));

    return FixedPointSet{u,
                         rho,
                         std::move(map),
                         std::move(particular),
                         std::move(x),
                         std::move(null_basis),
                         std::move(basis),
                         std::move(sv),
                         residual,
                         ces.residual,
                         ces.iterations,
                         std::move(warnings),
                         opt};
}

struct MembershipResult {
    bool member = false;
    double map_residual = 0.0;     // trace distance of deutsch_map(sigma) from sigma
    double affine_residual = 0.0;  // HS distance of sigma from the fixed affine subspace
    double min_eigenvalue = 0.0;
};

struct MembershipOptions {
    // Negative means: use the set's residual_tol.
    double tolerance = -1.0;
    bool check_affine = true;
};

inline MembershipResult membership(const FixedPointSet& fps, const ComplexMatrix& sigma, MembershipOptions mopt = {}) {
    if (sigma.rows() != fps.dim2() || sigma.cols() != fps.dim2())
        throw DimensionError("membership: state has dim " + std::to_string(sigma.rows()) + ", set has dim " +
                             std::to_string(fps.dim2()));
    const double tol = mopt.tolerance < 0.0 ? fps.options.residual_tol : mopt.tolerance;
    MembershipResult r;
    r.min_eigenvalue = hermitian_eigenvalues(sigma).minCoeff();
    const bool valid = all_finite(sigma) && hermiticity_error(sigma) <= tol::kHermitian &&
                       std::abs(sigma.trace() - Complex(1.0, 0.0)) <= tol::kTrace && r.min_eigenvalue >= -tol::kPsd;
    r.map_residual = half_trace_norm(time_traveller_output(fps.gate, fps.rho.matrix(), sigma) - sigma);
    const HermitianBasis hb(fps.dim2());
    const RealVector dx = hb.traceless_coordinates(0.5 * (sigma + sigma.adjoint())) - fps.particular_coordinates;
    r.affine_residual = (dx - fps.basis_coordinates * (fps.basis_coordinates.transpose() * dx)).norm();
    r.member = valid && r.map_residual <= tol && (!mopt.check_affine || r.affine_residual <= tol);
    return r;
}

inline MembershipResult membership(const FixedPointSet& fps, const DensityOperator& sigma, MembershipOptions mopt = {}) {
    return membership(fps, sigma.matrix(), mopt);
}

}  // namespace ctckit
