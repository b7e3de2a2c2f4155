#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace s3fn::nn {

/// Scalar loss as a function of a flat parameter/input vector.
using LossFunction = std::function<double(std::span<const double>)>;

/// Central differences (f(x + eps e_i) - f(x - eps e_i)) / (2 eps) at the
/// listed coordinates (all coordinates when `coords` is empty).
std::vector<double> numeric_gradient(const LossFunction& loss, std::span<const double> point, double eps = 1e-5,
                                     std::span<const std::size_t> coords = {});

/// max_i |a_i - n_i| / max(|a_i|, |n_i|, floor)
double max_relative_error(std::span<const double> analytic, std::span<const double> numeric, double floor = 1e-6);

/// Compares `analytic` (full length, indexed like `point`) against central
/// differences; returns the max relative error over the checked coordinates.
double grad_check(const LossFunction& loss, std::span<const double> point, std::span<const double> analytic,
                  double eps = 1e-5, std::span<const std::size_t> coords = {});

}  // namespace s3fn::nn
