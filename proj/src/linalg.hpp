// SPDX-License-Identifier: Apache-2.0
//
// Internal GEMM helpers over raw row-major buffers, backed by Eigen.
#pragma once

#include <cstddef>

#include <Eigen/Core>

namespace lunet::linalg {

/// Row-major matrix view. `stride` is the distance between row starts and
/// may be smaller than `cols` (overlapping rows, used for im2col windows).
struct ConstView {
  const double *data;
  std::size_t rows;
  std::size_t cols;
  std::size_t stride;
};

struct View {
  double *data;
  std::size_t rows;
  std::size_t cols;
  std::size_t stride;

  operator ConstView() const { return {data, rows, cols, stride}; }
};

inline ConstView dense(const double *p, std::size_t rows, std::size_t cols) {
  return {p, rows, cols, cols};
}
inline View dense(double *p, std::size_t rows, std::size_t cols) {
  return {p, rows, cols, cols};
}

namespace detail {
using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Stride = Eigen::OuterStride<>;
inline auto map(ConstView v) {
  return Eigen::Map<const RowMat, 0, Stride>(
      v.data, static_cast<Eigen::Index>(v.rows),
      static_cast<Eigen::Index>(v.cols),
      Stride(static_cast<Eigen::Index>(v.stride)));
}
inline auto map(View v) {
  return Eigen::Map<RowMat, 0, Stride>(
      v.data, static_cast<Eigen::Index>(v.rows),
      static_cast<Eigen::Index>(v.cols),
      Stride(static_cast<Eigen::Index>(v.stride)));
}
} // namespace detail

enum class Op { none, transpose };

/// out (+)= op(a) * op(b)
inline void gemm(ConstView a, Op ta, ConstView b, Op tb, View out,
                 bool accumulate) {
  auto A = detail::map(a);
  auto B = detail::map(b);
  auto C = detail::map(out);
  const bool at = ta == Op::transpose;
  const bool bt = tb == Op::transpose;
  if (accumulate) {
    if (!at && !bt)
      C.noalias() += A * B;
    else if (at && !bt)
      C.noalias() += A.transpose() * B;
    else if (!at && bt)
      C.noalias() += A * B.transpose();
    else
      C.noalias() += A.transpose() * B.transpose();
  } else {
    if (!at && !bt)
      C.noalias() = A * B;
    else if (at && !bt)
      C.noalias() = A.transpose() * B;
    else if (!at && bt)
      C.noalias() = A * B.transpose();
    else
      C.noalias() = A.transpose() * B.transpose();
  }
}

/// out = a * b for dense [m,k] x [k,n].
inline void gemm(const double *a, const double *b, double *out, std::size_t m,
                 std::size_t k, std::size_t n) {
  gemm(dense(a, m, k), Op::none, dense(b, k, n), Op::none, dense(out, m, n),
       false);
}

} // namespace lunet::linalg
