#pragma once

#include <cstddef>
#include <vector>

namespace vopi {

// Discretized lower-bound proportions {i * beta / (|A| + 1)}, i = 1..|A|,
// with |A| = 2^n - 1.
class ActionSpace {
public:
  ActionSpace() = default;
  ActionSpace(double beta, unsigned exponent);

  double beta() const noexcept { return beta_; }
  unsigned exponent() const noexcept { return exponent_; }
  std::size_t size() const noexcept { return actions_.size(); }
  double operator[](std::size_t i) const { return actions_.at(i); }
  const std::vector<double>& actions() const noexcept { return actions_; }

private:
  double beta_ = 0.0;
  unsigned exponent_ = 0;
  std::vector<double> actions_;
};

ActionSpace build_action_space(double beta, int exponent);

}  // namespace vopi
