#pragma once

#include <string>
#include <vector>

#include "asma/tensor.hpp"

namespace asma {

// One-hot artist class: index c in [0, K). The one-hot vector has exactly
// one component equal to 1.
class StyleLabel {
 public:
  StyleLabel(int class_index, int num_classes) : index_(class_index), k_(num_classes) {
    if (num_classes <= 0) throw ConfigError("StyleLabel: non-positive class count " + std::to_string(num_classes));
    if (class_index < 0 || class_index >= num_classes)
      throw ConfigError("StyleLabel: class index " + std::to_string(class_index) + " out of range [0, " +
                        std::to_string(num_classes) + ")");
  }

  int class_index() const { return index_; }
  int num_classes() const { return k_; }

  template <typename T>
  std::vector<T> one_hot() const {
    std::vector<T> v(static_cast<size_t>(k_), T(0));
    v[static_cast<size_t>(index_)] = T(1);
    return v;
  }

  template <typename T>
  Tensor<T> one_hot_tensor() const {
    return Tensor<T>::from_data(Shape{k_}, one_hot<T>());
  }

 private:
  int index_;
  int k_;
};

}  // namespace asma
