#include "vopi/action_space.hpp"

#include <string>

#include "vopi/error.hpp"

namespace vopi {

ActionSpace::ActionSpace(double beta, unsigned exponent) : beta_(beta), exponent_(exponent) {
  if (!(beta > 0.0 && beta < 1.0)) throw ArgumentError("beta must lie in (0, 1)");
  if (exponent < 1 || exponent > 20) {
    throw ArgumentError("action-space exponent must be in [1, 20], got " + std::to_string(exponent));
  }
  const std::size_t count = (std::size_t{1} << exponent) - 1;
  actions_.reserve(count);
  for (std::size_t i = 1; i <= count; ++i) {
    actions_.push_back(static_cast<double>(i) * beta / static_cast<double>(count + 1));
  }
}

ActionSpace build_action_space(double beta, int exponent) {
  if (exponent < 1) throw ArgumentError("action-space exponent must be at least 1");
  return ActionSpace(beta, static_cast<unsigned>(exponent));
}

}  // namespace vopi
