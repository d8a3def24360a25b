#pragma once

#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "asma/rng.hpp"
#include "asma/tape.hpp"
#include "asma/tensor.hpp"

namespace asma {

struct FdResult {
  double max_rel_err = 0.0;
  int64_t coords_checked = 0;
};

// Central finite differences against the recorded backward pass. loss_fn
// must rebuild the forward from the given leaves on every call and be pure
// given their current values; numeric probing only runs forward passes, so
// it stays independent of the gradient rules it checks.
template <typename T>
FdResult finite_difference_check(const std::function<Tensor<T>(Tape<T>&)>& loss_fn, std::vector<Tensor<T>> leaves,
                                 double epsilon, int64_t max_coords_per_tensor, Rng& rng);

struct GradSuiteReport {
  double max_primitive_err = 0.0;
  double max_composite_err = 0.0;
  double seconds = 0.0;
  int failures = 0;
  bool pass() const { return failures == 0; }
};

inline constexpr double kPrimitiveTol = 1e-4;
inline constexpr double kCompositeTol = 1e-3;

// The full 64-bit verification suite: every differentiable primitive plus
// the composed generator (through the content loss) and discriminator,
// n_seeds random draws each. Logs one line per check when `log` is given.
GradSuiteReport run_gradient_suite(uint64_t base_seed, int n_seeds, std::ostream* log);

}  // namespace asma
