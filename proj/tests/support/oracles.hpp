#pragma once

// Independent reference implementations used only as test oracles. These
// are written as direct loops from the operation definitions and must stay
// decoupled from the library's im2col/GEMM path.

#include <vector>

#include "asma/metrics.hpp"
#include "asma/ops.hpp"
#include "asma/tensor.hpp"

namespace asma::testing {

template <typename T>
Tensor<T> naive_conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, int stride, int pad,
                       PadMode mode);

template <typename T>
Tensor<T> naive_conv2d_transposed(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, int stride, int pad);

// Largest singular value via eigen-decomposition of W^T W.
double svd_largest_singular_value(const std::vector<double>& w, int64_t rows, int64_t cols);

template <typename T>
double svd_largest_singular_value(const Tensor<T>& w) {
  std::vector<double> buf(w.data().begin(), w.data().end());
  return svd_largest_singular_value(buf, w.shape()[0], w.numel() / w.shape()[0]);
}

// Naive double-loop detail grid mirroring the documented statistic.
template <typename T>
DetailGrid naive_detail_map(const Tensor<T>& image, int n);

double naive_srr(const DetailGrid& a, const DetailGrid& b);

}  // namespace asma::testing
