#pragma once

#include <memory>
#include <random>

#include "dualstab/algebra.hpp"
#include "dualstab/hilbert.hpp"

namespace testsupport {

using dualstab::algebra::Matrix;
using dualstab::algebra::Vector;

inline Matrix random_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> nd;
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = nd(rng);
  return m;
}

inline Vector random_vector(std::mt19937_64& rng, int n) { return random_matrix(rng, n, 1).col(0); }

// Well conditioned SPD: R R^T + n I.
inline Matrix random_spd(std::mt19937_64& rng, int n) {
  const Matrix r = random_matrix(rng, n, n);
  Matrix m = r * r.transpose() + n * Matrix::Identity(n, n);
  return 0.5 * (m + m.transpose());
}

inline dualstab::hilbert::TruthSpacePtr random_truth(std::mt19937_64& rng, int n) {
  return std::make_shared<const dualstab::hilbert::TruthSpace>(random_spd(rng, n));
}

inline dualstab::hilbert::TruthSpacePtr identity_truth(int n) {
  return std::make_shared<const dualstab::hilbert::TruthSpace>(Matrix::Identity(n, n));
}

}  // namespace testsupport
