#pragma once

#include <utility>
#include <vector>

#include "rkm/kernels.hpp"
#include "rkm/linalg.hpp"

namespace rkm::structure {

using linalg::Matrix;
using linalg::SymMatrix;
using linalg::Vector;

enum class ApproximantKind { row_plus_column, block_constant };

/// Compact block-structured approximation of a kernel matrix K with blocks
/// b(x). For x in block i and y in block j:
///   row_plus_column: A(x, y) = col_means(x, j) + row_means(y, i) - block_means(i, j)
///   block_constant:  B(x, y) = block_means(i, j)
/// where col_means(x, j) averages K(x, .) over block j, row_means(y, i)
/// averages K(., y) over block i and block_means(i, j) averages block (i, j).
struct BlockApproximant {
    ApproximantKind kind;
    std::vector<std::pair<Eigen::Index, Eigen::Index>> block_bounds;
    Matrix block_means;
    Matrix col_means;
    Matrix row_means;

    Eigen::Index size() const;
    Matrix materialize() const;
    /// Products with the approximant and its transpose without materializing.
    Vector apply(const Vector& v) const;
    Vector apply_transpose(const Vector& v) const;
};

BlockApproximant approximant_A(const kernels::KernelMatrix& km);
BlockApproximant approximant_B(const kernels::KernelMatrix& km);

/// Operator norm of K - approximant by power iteration at tol 1e-8.
double residual_norm(const kernels::KernelMatrix& km, const BlockApproximant& approx);

struct EigenvalueCount {
    int above = 0;
    int below = 0;
};

/// Numbers of eigenvalues > threshold and < -threshold.
EigenvalueCount count_large_eigenvalues(const kernels::KernelMatrix& km, double threshold);
EigenvalueCount count_large_eigenvalues(const SymMatrix& m, double threshold);

/// Principal angles in radians, descending.
struct EigenspaceAngle {
    Vector angles;

    double max() const { return angles.size() ? angles[0] : 0.0; }
};

/// Orthonormal basis of the piecewise-constant vectors: one normalized
/// indicator column per label that occurs, in label order.
Matrix indicator_basis(const std::vector<int>& labels);

/// Angles between span(eigvecs) and the piecewise-constant space of `labels`.
EigenspaceAngle principal_angles(const Matrix& eigvecs, const std::vector<int>& labels);

} // namespace rkm::structure
