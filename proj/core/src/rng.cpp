#include "asma/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace asma {

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Box-Muller; u1 nudged away from 0 so log stays finite.
  double u1 = uniform();
  double u2 = uniform();
  if (u1 < 1e-300) u1 = 1e-300;
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

std::string Rng::serialize() const {
  std::ostringstream os;
  os << gen_ << ' ' << (have_spare_ ? 1 : 0) << ' ';
  os.precision(17);
  os << spare_;
  return os.str();
}

void Rng::deserialize(const std::string& s) {
  std::istringstream is(s);
  int spare_flag = 0;
  is >> gen_ >> spare_flag >> spare_;
  if (is.fail()) throw std::runtime_error("Rng::deserialize: malformed state string");
  have_spare_ = spare_flag != 0;
}

}  // namespace asma
