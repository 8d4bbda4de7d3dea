#pragma once

#include "rkm/linalg.hpp"

namespace rkm::linalg::detail {

// Reorders eigenpairs by descending signed value (stable) and fixes each
// eigenvector's sign so its largest-magnitude entry is positive.
SpectralDecomposition sort_descending(const Vector& values, const Matrix& vectors);

void fix_sign(Eigen::Ref<Vector> v);

// Dense path cutoff for top_eigenpairs.
inline constexpr Eigen::Index kDenseLimit = 600;
// sym_eig uses Jacobi up to this dimension.
inline constexpr Eigen::Index kJacobiLimit = 64;

SpectralDecomposition subspace_top_eigenpairs(const Matrix& m, std::size_t count, double tol);

} // namespace rkm::linalg::detail
