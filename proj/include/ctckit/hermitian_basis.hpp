#pragma once

#include <cmath>
#include <vector>

#include "ctckit/core.hpp"

namespace ctckit {

// Hilbert-Schmidt orthonormal basis of the Hermitian d x d matrices:
// I/sqrt(d) first, then the d^2 - 1 generalised Gell-Mann matrices in the
// order symmetric, antisymmetric, diagonal. For d = 2 this is
// I/sqrt2, X/sqrt2, Y/sqrt2, Z/sqrt2.
class HermitianBasis {
public:
    explicit HermitianBasis(Index dim) : dim_(dim) {
        if (dim <= 0) throw DimensionError("HermitianBasis: dimension must be positive");
        const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
        elements_.reserve(static_cast<std::size_t>(dim * dim));
        elements_.push_back(ComplexMatrix::Identity(dim, dim) / std::sqrt(static_cast<double>(dim)));
        for (Index j = 0; j < dim; ++j)
            for (Index k = j + 1; k < dim; ++k) {
                ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
                m(j, k) = inv_sqrt2;
                m(k, j) = inv_sqrt2;
                elements_.push_back(std::move(m));
            }
        for (Index j = 0; j < dim; ++j)
            for (Index k = j + 1; k < dim; ++k) {
                ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
                m(j, k) = Complex(0.0, -inv_sqrt2);
                m(k, j) = Complex(0.0, inv_sqrt2);
                elements_.push_back(std::move(m));
            }
        for (Index l = 1; l < dim; ++l) {
            const double norm = 1.0 / std::sqrt(static_cast<double>(l * (l + 1)));
            ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
            for (Index j = 0; j < l; ++j) m(j, j) = norm;
            m(l, l) = -static_cast<double>(l) * norm;
            elements_.push_back(std::move(m));
        }
    }

    Index dim() const noexcept { return dim_; }
    Index size() const noexcept { return static_cast<Index>(elements_.size()); }
    Index traceless_size() const noexcept { return size() - 1; }
    const ComplexMatrix& operator[](Index i) const { return elements_[static_cast<std::size_t>(i)]; }

    // Re Tr(m B_i) for i = 1..d^2-1.
    RealVector traceless_coordinates(const ComplexMatrix& m) const {
        check(m);
        RealVector x(traceless_size());
        for (Index i = 1; i < size(); ++i) x(i - 1) = hs_inner(m, (*this)[i]);
        return x;
    }

    // trace * I/d + sum_i x_i B_{i+1}.
    ComplexMatrix from_traceless(const RealVector& x, double trace = 1.0) const {
        if (x.size() != traceless_size()) throw DimensionError("HermitianBasis: coordinate vector has wrong length");
        ComplexMatrix m = ComplexMatrix::Identity(dim_, dim_) * (trace / static_cast<double>(dim_));
        for (Index i = 0; i < x.size(); ++i) m += x(i) * (*this)[i + 1];
        return m;
    }

    // Combination sum_i x_i B_{i+1} without the identity part.
    ComplexMatrix combine_traceless(const RealVector& x) const {
        if (x.size() != traceless_size()) throw DimensionError("HermitianBasis: coordinate vector has wrong length");
        ComplexMatrix m = ComplexMatrix::Zero(dim_, dim_);
        for (Index i = 0; i < x.size(); ++i) m += x(i) * (*this)[i + 1];
        return m;
    }

    // Re Tr(a b) for Hermitian a, b.
    static double hs_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
        return a.cwiseProduct(b.transpose()).sum().real();
    }

private:
    void check(const ComplexMatrix& m) const {
        if (m.rows() != dim_ || m.cols() != dim_) throw DimensionError("HermitianBasis: matrix has wrong dimension");
    }

    Index dim_;
    std::vector<ComplexMatrix> elements_;
};

}  // namespace ctckit
