#pragma once

#include <functional>
#include <vector>

#include "asma/tensor.hpp"

namespace asma {

// Reverse-mode differentiation record. Ops append one backward rule per
// recorded operation; backward() replays them in exact reverse creation
// order. A tape is confined to one logical execution stream.
template <typename T>
class Tape {
 public:
  explicit Tape(bool recording = true) : recording_(recording) {}

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return recording_; }
  void set_recording(bool r) { recording_ = r; }
  std::size_t size() const { return nodes_.size(); }

  void record(std::function<void()> backward_rule) { nodes_.push_back(std::move(backward_rule)); }

  // Reverse accumulation from a scalar loss. Single-shot: a second call
  // without reset() is an error because grad buffers would double-count.
  void backward(Tensor<T>& loss) {
    if (!loss.defined() || loss.numel() != 1) throw ShapeError("backward() requires a defined scalar loss");
    if (consumed_) throw ConfigError("backward() called twice on the same tape; reset() first");
    if (nodes_.empty() || !loss.requires_grad()) throw ConfigError("backward() on a detached graph: loss has no recorded dependencies");
    loss.ensure_grad();
    loss.grad()[0] = T(1);
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
    consumed_ = true;
  }

  void reset() {
    nodes_.clear();
    consumed_ = false;
  }

 private:
  std::vector<std::function<void()>> nodes_;
  bool recording_;
  bool consumed_ = false;
};

}  // namespace asma
