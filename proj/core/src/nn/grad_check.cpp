#include "s3fn/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "s3fn/error.hpp"

namespace s3fn::nn {

std::vector<double> numeric_gradient(const LossFunction& loss, std::span<const double> point, double eps,
                                     std::span<const std::size_t> coords) {
  std::vector<double> x(point.begin(), point.end());
  std::vector<std::size_t> all;
  if (coords.empty()) {
    all.resize(x.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    coords = all;
  }
  std::vector<double> out;
  out.reserve(coords.size());
  for (std::size_t i : coords) {
    if (i >= x.size()) throw Error(Errc::index, "grad_check coordinate out of range");
    const double saved = x[i];
    x[i] = saved + eps;
    const double up = loss(x);
    x[i] = saved - eps;
    const double down = loss(x);
    x[i] = saved;
    out.push_back((up - down) / (2.0 * eps));
  }
  return out;
}

double max_relative_error(std::span<const double> analytic, std::span<const double> numeric, double floor) {
  if (analytic.size() != numeric.size()) throw Error(Errc::shape, "gradient length mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]), floor});
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
  }
  return worst;
}

double grad_check(const LossFunction& loss, std::span<const double> point, std::span<const double> analytic,
                  double eps, std::span<const std::size_t> coords) {
  if (analytic.size() != point.size()) throw Error(Errc::shape, "analytic gradient length differs from point");
  const auto numeric = numeric_gradient(loss, point, eps, coords);
  std::vector<double> picked;
  if (coords.empty()) {
    picked.assign(analytic.begin(), analytic.end());
  } else {
    for (std::size_t i : coords) picked.push_back(analytic[i]);
  }
  return max_relative_error(picked, numeric);
}

}  // namespace s3fn::nn
