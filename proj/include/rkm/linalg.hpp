#pragma once

#include <cstddef>
#include <functional>

#include <Eigen/Dense>

namespace rkm::linalg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense symmetric matrix of doubles.
///
/// Construction validates that every entry is finite and that the matrix is
/// symmetric to 1e-12 relative to its largest entry. Code that builds a
/// matrix symmetric by construction (mirrored pair loops) can skip the check
/// with assume_symmetric().
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(Matrix m);

    static SymMatrix assume_symmetric(Matrix m);
    static SymMatrix zero(Eigen::Index dim) { return assume_symmetric(Matrix::Zero(dim, dim)); }
    static SymMatrix identity(Eigen::Index dim) { return assume_symmetric(Matrix::Identity(dim, dim)); }
    static SymMatrix diagonal(const Vector& d) { return assume_symmetric(d.asDiagonal()); }

    Eigen::Index dim() const { return m_.rows(); }
    double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
    const Matrix& matrix() const { return m_; }

private:
    Matrix m_;
};

/// Eigenpairs sorted by descending signed eigenvalue; column i of
/// `eigenvectors` belongs to `eigenvalues[i]`.
struct SpectralDecomposition {
    Vector eigenvalues;
    Matrix eigenvectors;
};

/// Full eigendecomposition. Cyclic Jacobi for small matrices, Householder
/// tridiagonalization with implicit QL above that. Ties keep input index
/// order. Each eigenvector is signed so its largest-magnitude entry is
/// positive.
SpectralDecomposition sym_eig(const SymMatrix& m);

/// Eigenvalues only, descending. Skips eigenvector accumulation.
Vector sym_eigenvalues(const SymMatrix& m);

/// The two dense solvers behind sym_eig, exposed for cross-checking.
SpectralDecomposition jacobi_eig(const SymMatrix& m);
SpectralDecomposition tridiagonal_ql_eig(const SymMatrix& m, bool want_vectors = true);

/// The `count` eigenpairs of largest |lambda|, ordered by descending |lambda|
/// (ties by signed value, then index). Small matrices go through sym_eig;
/// large ones through block power iteration with Rayleigh-Ritz, converged
/// until every returned pair has residual <= tol * |lambda_max|.
SpectralDecomposition top_eigenpairs(const SymMatrix& m, std::size_t count, double tol = 1e-10);

/// The `count` largest |lambda|, descending.
Vector top_singular_values(const SymMatrix& m, std::size_t count);

/// Spectral norm by power iteration on M^T M, started from the normalized
/// all-ones vector perturbed by 1e-3 e_1. Stops once successive estimates
/// differ by less than tol; throws ConvergenceError after 10000 steps.
double operator_norm(const SymMatrix& m, double tol);

/// Same, for a general square matrix.
double operator_norm(const Matrix& m, double tol);

/// Matrix-free variant: `apply` maps x to Mx, `apply_transpose` to M^T x.
double operator_norm(Eigen::Index dim, const std::function<Vector(const Vector&)>& apply,
                     const std::function<Vector(const Vector&)>& apply_transpose, double tol);

/// Soft threshold of the spectrum: lambda -> max(0, |lambda| - threshold),
/// eigenvectors unchanged. The sign of lambda is dropped, so the result is
/// positive semidefinite.
double soft_threshold(double lambda, double threshold);
SymMatrix apply_spectral_function(const SymMatrix& m, double threshold);

/// Rebuilds sum_i f(lambda_i) v_i v_i^T from a (possibly partial) set of
/// eigenpairs.
SymMatrix reconstruct(const SpectralDecomposition& d, const std::function<double(double)>& f);

/// Orthonormal basis for the column span, via Householder QR.
Matrix orthonormalize(const Matrix& columns);

} // namespace rkm::linalg
