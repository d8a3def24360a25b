#pragma once

#include <Eigen/Core>

namespace asma::detail {

template <typename T>
using MatMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename T>
using CMatMap = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// C (m x n) = A (m x k) * B (k x n), all row-major contiguous.
template <typename T>
inline void gemm(const T* a, const T* b, T* c, int64_t m, int64_t k, int64_t n, bool accumulate = false) {
  CMatMap<T> A(a, m, k);
  CMatMap<T> B(b, k, n);
  MatMap<T> C(c, m, n);
  if (accumulate)
    C.noalias() += A * B;
  else
    C.noalias() = A * B;
}

// C (m x n) = A^T with A (k x m), times B (k x n).
template <typename T>
inline void gemm_at(const T* a, const T* b, T* c, int64_t m, int64_t k, int64_t n, bool accumulate = false) {
  CMatMap<T> A(a, k, m);
  CMatMap<T> B(b, k, n);
  MatMap<T> C(c, m, n);
  if (accumulate)
    C.noalias() += A.transpose() * B;
  else
    C.noalias() = A.transpose() * B;
}

// C (m x n) = A (m x k) * B^T with B (n x k).
template <typename T>
inline void gemm_bt(const T* a, const T* b, T* c, int64_t m, int64_t k, int64_t n, bool accumulate = false) {
  CMatMap<T> A(a, m, k);
  CMatMap<T> B(b, n, k);
  MatMap<T> C(c, m, n);
  if (accumulate)
    C.noalias() += A * B.transpose();
  else
    C.noalias() = A * B.transpose();
}

}  // namespace asma::detail
