#include "billiard/fit.hpp"

namespace billiard {

LinFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  LinFit fit;
  const std::size_t n = xs.size();
  fit.points = n;
  if (n < 2) return fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double d = static_cast<double>(n) * sxx - sx * sx;
  if (d == 0) return fit;
  fit.slope = (static_cast<double>(n) * sxy - sx * sy) / d;
  fit.intercept = (sy - fit.slope * sx) / static_cast<double>(n);
  double ss_res = 0, ss_tot = 0;
  const double mean = sy / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double pred = fit.slope * xs[i] + fit.intercept;
    ss_res += (ys[i] - pred) * (ys[i] - pred);
    ss_tot += (ys[i] - mean) * (ys[i] - mean);
  }
  fit.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

}  // namespace billiard
