#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "asma/rng.hpp"
#include "asma/tensor.hpp"

namespace asma {

// Named parameter store. Trainable entries get eager zeroed grad buffers;
// non-trainable entries carry persistent state (spectral-norm u vectors).
// Entry order is creation order and is the checkpoint record order.
template <typename T>
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Tensor<T> tensor;
    bool trainable = true;
  };

  // Returns an aliasing handle (storage is shared with the store entry).
  Tensor<T> create(const std::string& name, const Shape& shape) {
    return emplace(name, Tensor<T>::zeros(shape), true);
  }

  Tensor<T> create_state(const std::string& name, const Shape& shape) {
    return emplace(name, Tensor<T>::zeros(shape), false);
  }

  Tensor<T>* find(const std::string& name) {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &entries_[it->second].tensor;
  }
  const Tensor<T>* find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &entries_[it->second].tensor;
  }

  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }

  int64_t total_trainable() const {
    int64_t n = 0;
    for (const auto& e : entries_)
      if (e.trainable) n += e.tensor.numel();
    return n;
  }

  void zero_grads() {
    for (auto& e : entries_)
      if (e.trainable) e.tensor.zero_grad();
  }

  void set_requires_grad(bool rg) {
    for (auto& e : entries_)
      if (e.trainable) e.tensor.set_requires_grad(rg);
  }

  // Deep copy of all values, for snapshot-equality tests.
  std::vector<std::vector<T>> snapshot() const {
    std::vector<std::vector<T>> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) {
      auto d = e.tensor.data();
      out.emplace_back(d.begin(), d.end());
    }
    return out;
  }

 private:
  Tensor<T> emplace(const std::string& name, Tensor<T> t, bool trainable) {
    if (index_.count(name)) throw ConfigError("ParamStore: duplicate parameter name " + name);
    if (trainable) {
      t.set_requires_grad(true);
      t.ensure_grad();
    }
    index_[name] = entries_.size();
    entries_.push_back(Entry{name, t, trainable});
    return t;
  }

  std::vector<Entry> entries_;
  std::map<std::string, size_t> index_;
};

// ---------------------------------------------------------------------------
// Initialization policy. He-style fan-in scaling with the LeakyReLU gain;
// draw order is fixed so seeds reproduce bit-identically.
// ---------------------------------------------------------------------------

template <typename T>
void fill_normal(Tensor<T>& t, Rng& rng, double stddev) {
  for (T& v : t.data()) v = static_cast<T>(rng.normal() * stddev);
}

template <typename T>
void fill_he_normal(Tensor<T>& t, Rng& rng, int64_t fan_in, double leaky_slope) {
  double gain = std::sqrt(2.0 / (1.0 + leaky_slope * leaky_slope));
  fill_normal(t, rng, gain / std::sqrt(static_cast<double>(fan_in)));
}

template <typename T>
void fill_constant(Tensor<T>& t, T v) {
  for (T& x : t.data()) x = v;
}

template <typename T>
void fill_unit_normalized(Tensor<T>& t, Rng& rng) {
  double n2 = 0;
  for (T& v : t.data()) {
    v = static_cast<T>(rng.normal());
    n2 += static_cast<double>(v) * static_cast<double>(v);
  }
  double inv = 1.0 / std::max(std::sqrt(n2), 1e-12);
  for (T& v : t.data()) v = static_cast<T>(v * inv);
}

// ---------------------------------------------------------------------------
// Adam. Moments are kept per parameter in attach order; t is the shared
// step count for bias correction.
// ---------------------------------------------------------------------------

template <typename T>
class Adam {
 public:
  Adam(T lr, T beta1, T beta2, T eps = T(1e-8)) : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void attach(ParamStore<T>& store) {
    for (auto& e : store.entries())
      if (e.trainable) slots_.push_back(Slot{e.name, e.tensor, std::vector<T>(static_cast<size_t>(e.tensor.numel()), T(0)),
                                             std::vector<T>(static_cast<size_t>(e.tensor.numel()), T(0))});
  }

  void step() {
    ++t_;
    const T bc1 = T(1) - static_cast<T>(std::pow(static_cast<double>(beta1_), static_cast<double>(t_)));
    const T bc2 = T(1) - static_cast<T>(std::pow(static_cast<double>(beta2_), static_cast<double>(t_)));
    for (auto& s : slots_) {
      auto p = s.param.data();
      auto g = s.param.grad();
      for (size_t i = 0; i < p.size(); ++i) {
        s.m[i] = beta1_ * s.m[i] + (T(1) - beta1_) * g[i];
        s.v[i] = beta2_ * s.v[i] + (T(1) - beta2_) * g[i] * g[i];
        const T mhat = s.m[i] / bc1;
        const T vhat = s.v[i] / bc2;
        p[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
      }
    }
  }

  void set_lr(T lr) { lr_ = lr; }
  T lr() const { return lr_; }
  int64_t step_count() const { return t_; }
  void set_step_count(int64_t t) { t_ = t; }

  struct Slot {
    std::string name;
    Tensor<T> param;
    std::vector<T> m, v;
  };
  std::vector<Slot>& slots() { return slots_; }
  const std::vector<Slot>& slots() const { return slots_; }

 private:
  T lr_, beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::vector<Slot> slots_;
};

}  // namespace asma
