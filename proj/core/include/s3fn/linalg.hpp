#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace s3fn {

/// Eigenpairs of a real symmetric matrix, sorted by descending eigenvalue.
/// `vectors` is row-major n x n; row k is the unit eigenvector of values[k].
struct SymmetricEigen {
  std::size_t n = 0;
  std::vector<double> values;
  std::vector<double> vectors;
};

/// Cyclic Jacobi rotations on a row-major symmetric n x n matrix. Only the
/// symmetric part of the input is used. Converges to machine precision in a
/// handful of sweeps for the band counts seen here (n up to a few hundred).
SymmetricEigen symmetric_eigen(std::span<const double> matrix, std::size_t n, int max_sweeps = 100);

}  // namespace s3fn
