#include "vecrl/space.hpp"

#include <sstream>
#include <stdexcept>

namespace vecrl {

Space Space::discrete(std::size_t n) {
  if (n < 1) throw std::invalid_argument("Space::discrete: n must be >= 1");
  Space s;
  s.kind = Kind::Discrete;
  s.n = n;
  return s;
}

Space Space::box(std::vector<double> low, std::vector<double> high) {
  if (low.empty() || low.size() != high.size()) {
    throw std::invalid_argument("Space::box: low/high must be non-empty and equal-length");
  }
  for (std::size_t i = 0; i < low.size(); ++i) {
    if (!(low[i] < high[i])) {
      throw std::invalid_argument("Space::box: low must be < high elementwise");
    }
  }
  Space s;
  s.kind = Kind::Box;
  s.low = std::move(low);
  s.high = std::move(high);
  return s;
}

std::string Space::describe() const {
  std::ostringstream os;
  if (kind == Kind::Discrete) {
    os << "Discrete(" << n << ")";
  } else {
    os << "Box(dim=" << low.size() << ", [" << low[0] << "," << high[0] << "]";
    if (low.size() > 1) os << ", ...";
    os << ")";
  }
  return os.str();
}

}  // namespace vecrl
