#include "psim/rng.hpp"

#include <sstream>

namespace psim {

std::string Rng::state() const {
  std::ostringstream oss;
  oss << engine_;
  return oss.str();
}

void Rng::set_state(const std::string& s) {
  std::istringstream iss(s);
  iss >> engine_;
  if (iss.fail()) throw std::invalid_argument("Rng::set_state: malformed engine state");
}

}  // namespace psim
