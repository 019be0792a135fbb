#pragma once

#include <vector>

namespace billiard {

struct LinFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

LinFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace billiard
