#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>

#include "ssmm/types.hpp"

namespace ssmm {

using Index = Eigen::Index;

/// Row-major dense matrix, templated on element scalar.
template <typename T>
using DenseMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using IdxMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Scalar triple-loop product C[i,j] = sum_k A[i,k]*B[k,j], accumulating in
/// ascending-k order. Used as the verification reference for every kernel;
/// kept free of any machine or kernel code on purpose.
template <typename T>
DenseMatrix<T> reference_matmul(const DenseMatrix<T>& a, const DenseMatrix<T>& b) {
    if (a.cols() != b.rows())
        throw ShapeError("reference_matmul: inner dimensions differ");
    DenseMatrix<T> c = DenseMatrix<T>::Zero(a.rows(), b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index k = 0; k < a.cols(); ++k) {
            const T aik = a(i, k);
            for (Index j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

/// Appends zero columns until cols is a multiple of m.
template <typename T>
DenseMatrix<T> pad_cols_to_multiple(const DenseMatrix<T>& d, int m) {
    const Index rem = d.cols() % m;
    if (rem == 0) return d;
    DenseMatrix<T> out = DenseMatrix<T>::Zero(d.rows(), d.cols() + (m - rem));
    out.leftCols(d.cols()) = d;
    return out;
}

// Seeded matrix generation. Integer elements are drawn from [-8, 8] so that
// desk-scale products accumulate exactly in 32 bits; floating-point elements
// from [-1, 1).
namespace detail {

template <typename T>
T random_element(std::mt19937_64& rng) {
    if constexpr (std::is_integral_v<T>) {
        return static_cast<T>(static_cast<std::int64_t>(rng() % 17) - 8);
    } else {
        const double u = static_cast<double>(rng() >> 11) * 0x1p-53;  // [0,1)
        return static_cast<T>(u * 2.0 - 1.0);
    }
}

}  // namespace detail

template <typename T>
DenseMatrix<T> random_dense(Index rows, Index cols, std::mt19937_64& rng) {
    DenseMatrix<T> d(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) d(i, j) = detail::random_element<T>(rng);
    return d;
}

}  // namespace ssmm
