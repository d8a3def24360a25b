#pragma once

#include <ostream>
#include <vector>

#include "asma/tensor.hpp"

namespace asma {

// n x n grid of nonnegative per-patch detail values; D[i][j] at row i,
// column j. Trailing pixels that do not fill a patch are cropped.
struct DetailGrid {
  int n = 0;
  std::vector<double> values;  // n*n row-major

  double at(int i, int j) const { return values[static_cast<size_t>(i * n + j)]; }
};

// Patch statistic: mean gradient magnitude of the grayscale image (central
// differences with edge clamping) within each patch. Images are (3,H,W) in
// [-1,1].
template <typename T>
DetailGrid detail_map(const Tensor<T>& image, int n);

// Semantic Retention Ratio: column-normalize each grid over the row index,
// accumulate absolute differences and divide by n^2. Identity gives 0; the
// analytic upper bound under column normalization is 2/n. A zero-sum column
// in either grid contributes 0 and is reported on `log`.
template <typename T>
double srr(const Tensor<T>& x_o, const Tensor<T>& x_c, int n, std::ostream* log = nullptr);

double srr_from_grids(const DetailGrid& a, const DetailGrid& b, std::ostream* log = nullptr);

}  // namespace asma
