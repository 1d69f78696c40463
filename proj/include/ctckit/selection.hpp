#pragma once

// Rules that pick one time-traveller state sigma_U(rho) out of Q_U(rho), and
// the resulting nonlinear channel rho -> rho_hat.

#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "ctckit/core.hpp"
#include "ctckit/deutsch_map.hpp"

namespace ctckit {

enum class SelectionKind { MaxEntropy, MinEntropy, ConstantIndex };

inline std::string to_string(SelectionKind k) {
    switch (k) {
        case SelectionKind::MaxEntropy: return "max-entropy";
        case SelectionKind::MinEntropy: return "min-entropy";
        case SelectionKind::ConstantIndex: return "constant";
    }
    return "unknown";
}

inline SelectionKind parse_selection_kind(const std::string& s) {
    if (s == "max-entropy" || s == "max_entropy") return SelectionKind::MaxEntropy;
    if (s == "min-entropy" || s == "min_entropy") return SelectionKind::MinEntropy;
    if (s == "constant" || s == "constant_index" || s == "constant-index") return SelectionKind::ConstantIndex;
    throw ParseError("unknown selection rule '" + s + "' (expected max-entropy, min-entropy or constant)");
}

struct SelectionRule {
    SelectionKind kind = SelectionKind::MaxEntropy;
    // Fixed-subspace coordinates for ConstantIndex; extra entries are ignored,
    // missing ones are zero.
    RealVector coordinates;
    double step_init = 0.5;
    double backtrack_factor = 0.5;
    double grad_tol = 1e-10;
    Index max_iters = 10000;

    static SelectionRule max_entropy() { return {}; }
    static SelectionRule min_entropy() {
        SelectionRule r;
        r.kind = SelectionKind::MinEntropy;
        return r;
    }
    static SelectionRule constant(RealVector coords) {
        SelectionRule r;
        r.kind = SelectionKind::ConstantIndex;
        r.coordinates = std::move(coords);
        return r;
    }

    void validate() const {
        if (!(grad_tol > 0.0)) throw InvalidStateError("selection rule: grad_tol must be positive");
        if (!(step_init > 0.0)) throw InvalidStateError("selection rule: step_init must be positive");
        if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0))
            throw InvalidStateError("selection rule: backtrack_factor must lie in (0, 1)");
        if (max_iters <= 0) throw InvalidStateError("selection rule: max_iters must be positive");
    }
};

struct SelectionResult {
    DensityOperator sigma;
    RealVector coordinates;  // in the fixed-point set's basis
    double entropy = 0.0;    // nats
    Index iterations = 0;
    bool converged = true;
    double gradient_norm = 0.0;
};

namespace detail {

inline constexpr double kFeasibilityTol = 1e-14;
inline constexpr double kEigenFloor = 1e-14;
inline constexpr double kKernelTol = 1e-9;
inline constexpr double kStepCap = 4.0;  // exceeds the HS diameter of any density-operator set

inline bool feasible(const ComplexMatrix& m) { return hermitian_eigenvalues(m).minCoeff() >= -kFeasibilityTol; }

// dS/dy_i = -Tr(ln(sigma) B_i); eigenvalues floored so the gradient stays
// finite on the boundary of the cone. B_i are traceless, so the "+ I" term of
// the full derivative drops out.
inline RealVector entropy_gradient(const FixedPointSet& fps, const ComplexMatrix& sigma) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (sigma + sigma.adjoint()));
    RealVector logs = es.eigenvalues();
    for (Index i = 0; i < logs.size(); ++i) logs(i) = std::log(std::max(logs(i), kEigenFloor));
    const ComplexMatrix log_sigma = es.eigenvectors() * logs.asDiagonal() * es.eigenvectors().adjoint();
    RealVector g(fps.k());
    for (Index i = 0; i < fps.k(); ++i) g(i) = -HermitianBasis::hs_inner(log_sigma, fps.basis[static_cast<std::size_t>(i)]);
    return g;
}

// Largest t in [0, cap] with point(y + t d) feasible, by expansion then bisection.
inline double feasible_extent(const FixedPointSet& fps, const RealVector& y, const RealVector& d, double step) {
    double lo = 0.0;
    double hi = step;
    while (feasible(fps.point(y + hi * d))) {
        lo = hi;
        hi *= 2.0;
        if (hi > kStepCap) return lo;
    }
    for (int i = 0; i < 100 && hi - lo > 1e-16 * (1.0 + lo); ++i) {
        const double mid = 0.5 * (lo + hi);
        (feasible(fps.point(y + mid * d)) ? lo : hi) = mid;
    }
    return lo;
}

inline SelectionResult make_result(const FixedPointSet& fps, RealVector y, Index iters, bool converged, double gnorm) {
    ComplexMatrix m = fps.point(y);
    const double s = von_neumann_entropy(m);
    return SelectionResult{DensityOperator(std::move(m)), std::move(y), s, iters, converged, gnorm};
}

}  // namespace detail

// Projected gradient ascent on S over Q_U(rho). Strict concavity of S on a
// convex set makes the maximiser unique. The step along each ascent direction
// is found by expanding from step_init and then backtracking by
// backtrack_factor on the sign of the directional derivative, staying inside
// the PSD cone.
inline SelectionResult max_entropy_state(const FixedPointSet& fps, const SelectionRule& rule = {},
                                         std::optional<RealVector> start = std::nullopt) {
    rule.validate();
    const Index k = fps.k();
    if (k == 0) return detail::make_result(fps, RealVector(0), 0, true, 0.0);

    RealVector y = start ? *start : RealVector::Zero(k);
    if (y.size() != k) throw DimensionError("max_entropy_state: start has wrong number of coordinates");
    if (!detail::feasible(fps.point(y))) throw InvalidStateError("max_entropy_state: start point is not a density operator");

    double gnorm = 0.0;
    Index it = 0;
    for (; it < rule.max_iters; ++it) {
        const RealVector g = detail::entropy_gradient(fps, fps.point(y));
        gnorm = g.norm();
        if (gnorm <= rule.grad_tol) return detail::make_result(fps, std::move(y), it, true, gnorm);
        const RealVector d = g / gnorm;
        auto ascending = [&](double t) {
            const ComplexMatrix m = fps.point(y + t * d);
            return detail::feasible(m) && detail::entropy_gradient(fps, m).dot(d) > 0.0;
        };
        double lo = 0.0;
        double hi = rule.step_init;
        while (ascending(hi) && hi < detail::kStepCap) {
            lo = hi;
            hi /= rule.backtrack_factor;
        }
        for (int b = 0; b < 80 && hi - lo > 1e-15 * (1.0 + lo); ++b) {
            const double mid = lo + rule.backtrack_factor * (hi - lo);
            (ascending(mid) ? lo : hi) = mid;
        }
        if (lo == 0.0) break;  // no ascent step representable in double precision
        y += lo * d;
    }
    return detail::make_result(fps, std::move(y), it, false, gnorm);
}

// Descends S from the particular solution, walking to the boundary of the cone
// and then within the face reached, until an extreme point is hit. S is
// concave, so it is nonincreasing along every such ray. Where the gradient
// within a face vanishes the first face direction (canonical sign) is used.
// The result is one minimiser among possibly many.
inline SelectionResult min_entropy_state(const FixedPointSet& fps, const SelectionRule& rule = {}) {
    rule.validate();
    const Index k = fps.k();
    const Index d2 = fps.dim2();
    if (k == 0) return detail::make_result(fps, RealVector(0), 0, true, 0.0);

    RealVector y = RealVector::Zero(k);
    double gnorm = 0.0;
    for (Index it = 0; it < rule.max_iters; ++it) {
        const ComplexMatrix sigma = fps.point(y);
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (sigma + sigma.adjoint()));
        Index nker = 0;
        while (nker < d2 && es.eigenvalues()(nker) <= detail::kKernelTol) ++nker;
        const ComplexMatrix kernel = es.eigenvectors().leftCols(nker);

        // Directions D = sum_i w_i B_i with D * kernel = 0 keep us on the face.
        RealMatrix face = RealMatrix::Identity(k, k);
        if (nker > 0) {
            RealMatrix c(2 * d2 * nker, k);
            for (Index i = 0; i < k; ++i) {
                const ComplexMatrix bk = fps.basis[static_cast<std::size_t>(i)] * kernel;
                const Eigen::Map<const ComplexVector> flat(bk.data(), bk.size());
                c.col(i) << flat.real(), flat.imag();
            }
            Eigen::JacobiSVD<RealMatrix> svd(c, Eigen::ComputeFullV);
            Index rank = 0;
            while (rank < svd.singularValues().size() && svd.singularValues()(rank) > 1e-10) ++rank;
            face = svd.matrixV().rightCols(k - rank);
        }
        if (face.cols() == 0) return detail::make_result(fps, std::move(y), it, true, 0.0);

        const RealVector g = face.transpose() * detail::entropy_gradient(fps, sigma);
        gnorm = g.norm();
        RealVector dir;
        if (gnorm > rule.grad_tol) {
            dir = -(face * g) / gnorm;
        } else {
            dir = face.col(0);
            detail::canonical_sign(dir);
        }
        const double t = detail::feasible_extent(fps, y, dir, rule.step_init);
        if (t <= 0.0) return detail::make_result(fps, std::move(y), it, false, gnorm);
        y += t * dir;
    }
    return detail::make_result(fps, std::move(y), rule.max_iters, false, gnorm);
}

// particular + sum_i c_i B_i, with missing coordinates taken as 0 and extra
// ones ignored (k can change along a probe path). When that point is not a
// density operator it is pulled back towards the particular solution onto the
// boundary, and the result is flagged as not converged.
inline SelectionResult constant_index_state(const FixedPointSet& fps, const SelectionRule& rule) {
    rule.validate();
    const Index k = fps.k();
    RealVector y = RealVector::Zero(k);
    for (Index i = 0; i < std::min(k, rule.coordinates.size()); ++i) y(i) = rule.coordinates(i);
    if (detail::feasible(fps.point(y))) return detail::make_result(fps, std::move(y), 0, true, 0.0);
    double lo = 0.0;
    double hi = 1.0;
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        (detail::feasible(fps.point(mid * y)) ? lo : hi) = mid;
    }
    return detail::make_result(fps, lo * y, 0, false, 0.0);
}

inline SelectionResult select_state(const FixedPointSet& fps, const SelectionRule& rule) {
    switch (rule.kind) {
        case SelectionKind::MaxEntropy: return max_entropy_state(fps, rule);
        case SelectionKind::MinEntropy: return min_entropy_state(fps, rule);
        case SelectionKind::ConstantIndex: return constant_index_state(fps, rule);
    }
    throw InvalidStateError("select_state: unknown rule");
}

struct ChannelResult {
    DensityOperator rho_hat;
    SelectionResult selection;
    FixedPointSet fixed_points;
};

// rho -> Tr_2(U (rho (x) sigma_U(rho)) U^dag) with sigma_U(rho) chosen by rule.
inline ChannelResult ctc_channel(const UnitaryGate& u, const DensityOperator& rho, const SelectionRule& rule = {},
                                 const FixedPointOptions& fopt = {}) {
    FixedPointSet fps = fixed_point_set(u, rho, fopt);
    SelectionResult sel = select_state(fps, rule);
    DensityOperator out = evolve_out(u, rho, sel.sigma);
    return ChannelResult{std::move(out), std::move(sel), std::move(fps)};
}

}  // namespace ctckit
