#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace asma {

// Shape/dimension mismatches between tensors or against an op contract.
class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration values (out-of-range labels, bad strides, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numeric degeneracies: NaN/Inf in a value stream, degenerate statistics.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dense shape of rank 1..4. Rank-4 tensors are laid out N,C,H,W.
class Shape {
 public:
  Shape() = default;
  Shape(std::initializer_list<int64_t> dims);

  static Shape nchw(int64_t n, int64_t c, int64_t h, int64_t w) {
    return Shape{n, c, h, w};
  }

  int rank() const { return rank_; }
  int64_t operator[](int i) const { return d_[static_cast<size_t>(i)]; }
  int64_t numel() const;

  // NCHW accessors; only meaningful for rank-4 shapes.
  int64_t n() const { return d_[0]; }
  int64_t c() const { return d_[1]; }
  int64_t h() const { return d_[2]; }
  int64_t w() const { return d_[3]; }

  bool operator==(const Shape& o) const { return rank_ == o.rank_ && d_ == o.d_; }
  bool operator!=(const Shape& o) const { return !(*this == o); }

  std::string str() const;

 private:
  std::array<int64_t, 4> d_{0, 0, 0, 0};
  int rank_ = 0;
};

// Dense real tensor. Copies alias the same storage (shared-handle
// semantics); clone() makes an independent value. Gradient buffer lives
// next to the data so every alias observes accumulation and the
// requires_grad flag consistently.
template <typename T>
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(const Shape& s) { return Tensor(s, std::vector<T>(static_cast<size_t>(s.numel()), T(0))); }
  static Tensor full(const Shape& s, T v) { return Tensor(s, std::vector<T>(static_cast<size_t>(s.numel()), v)); }
  static Tensor from_data(const Shape& s, std::vector<T> v) {
    if (static_cast<int64_t>(v.size()) != s.numel())
      throw ShapeError("tensor data length " + std::to_string(v.size()) + " does not match shape " + s.str());
    return Tensor(s, std::move(v));
  }
  static Tensor scalar(T v) { return Tensor(Shape{1}, std::vector<T>{v}); }

  bool defined() const { return static_cast<bool>(p_); }
  const Shape& shape() const { return p_->shape; }
  int64_t numel() const { return static_cast<int64_t>(p_->data.size()); }

  std::span<T> data() { return {p_->data.data(), p_->data.size()}; }
  std::span<const T> data() const { return {p_->data.data(), p_->data.size()}; }

  T& operator[](int64_t i) { return p_->data[static_cast<size_t>(i)]; }
  const T& operator[](int64_t i) const { return p_->data[static_cast<size_t>(i)]; }

  int64_t index(int64_t n, int64_t c, int64_t h, int64_t w) const {
    const Shape& s = p_->shape;
    return ((n * s.c() + c) * s.h() + h) * s.w() + w;
  }
  T& at(int64_t n, int64_t c, int64_t h, int64_t w) { return (*this)[index(n, c, h, w)]; }
  const T& at(int64_t n, int64_t c, int64_t h, int64_t w) const { return (*this)[index(n, c, h, w)]; }

  bool requires_grad() const { return p_ && p_->requires_grad; }
  void set_requires_grad(bool rg) { p_->requires_grad = rg; }

  // Allocates a zeroed gradient buffer of identical shape if absent.
  void ensure_grad() {
    if (p_->grad.empty()) p_->grad.assign(p_->data.size(), T(0));
  }
  bool has_grad() const { return p_ && !p_->grad.empty(); }
  std::span<T> grad() { return {p_->grad.data(), p_->grad.size()}; }
  std::span<const T> grad() const { return {p_->grad.data(), p_->grad.size()}; }
  void zero_grad() {
    if (!p_->grad.empty()) std::fill(p_->grad.begin(), p_->grad.end(), T(0));
  }

  // Independent deep copy of the values; grad buffer and flag are not copied.
  Tensor clone() const { return Tensor(p_->shape, p_->data); }

  T item() const {
    if (numel() != 1) throw ShapeError("item() on non-scalar tensor of shape " + shape().str());
    return p_->data[0];
  }

  bool all_finite() const {
    for (const T& v : p_->data)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

  // Aliasing identity, used by parameter snapshots and stores.
  bool same_storage(const Tensor& o) const { return p_ == o.p_; }

 private:
  struct Rep {
    Shape shape;
    std::vector<T> data;
    std::vector<T> grad;
    bool requires_grad = false;
  };

  Tensor(const Shape& s, std::vector<T> v) : p_(std::make_shared<Rep>(Rep{s, std::move(v), {}, false})) {}

  std::shared_ptr<Rep> p_;
};

}  // namespace asma
