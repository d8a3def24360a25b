#include "asma/tensor.hpp"

#include <sstream>

namespace asma {

Shape::Shape(std::initializer_list<int64_t> dims) {
  if (dims.size() < 1 || dims.size() > 4)
    throw ShapeError("shape rank must be 1..4, got " + std::to_string(dims.size()));
  rank_ = static_cast<int>(dims.size());
  int i = 0;
  for (int64_t d : dims) {
    if (d <= 0) throw ShapeError("shape dimensions must be positive");
    d_[static_cast<size_t>(i++)] = d;
  }
}

int64_t Shape::numel() const {
  if (rank_ == 0) return 0;
  int64_t n = 1;
  for (int i = 0; i < rank_; ++i) n *= d_[static_cast<size_t>(i)];
  return n;
}

std::string Shape::str() const {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < rank_; ++i) {
    if (i) os << ',';
    os << d_[static_cast<size_t>(i)];
  }
  os << ')';
  return os.str();
}

}  // namespace asma
