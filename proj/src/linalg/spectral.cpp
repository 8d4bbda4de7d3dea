#include "detail.hpp"
#include "rkm/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

namespace rkm::linalg {

namespace detail {

void fix_sign(Eigen::Ref<Vector> v)
{
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) > best) {
            best = std::abs(v[i]);
            arg = i;
        }
    }
    if (v.size() > 0 && v[arg] < 0.0)
        v = -v;
}

SpectralDecomposition sort_descending(const Vector& values, const Matrix& vectors)
{
    std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return values[a] > values[b]; });

    SpectralDecomposition out{Vector(values.size()), Matrix(vectors.rows(), values.size())};
    for (Eigen::Index j = 0; j < values.size(); ++j) {
        out.eigenvalues[j] = values[order[static_cast<std::size_t>(j)]];
        out.eigenvectors.col(j) = vectors.col(order[static_cast<std::size_t>(j)]);
        fix_sign(out.eigenvectors.col(j));
    }
    return out;
}

} // namespace detail

SpectralDecomposition sym_eig(const SymMatrix& m)
{
    if (m.dim() <= detail::kJacobiLimit)
        return jacobi_eig(m);
    return tridiagonal_ql_eig(m, true);
}

SpectralDecomposition top_eigenpairs(const SymMatrix& m, std::size_t count, double tol)
{
    if (count == 0 || static_cast<Eigen::Index>(count) > m.dim()) {
        std::ostringstream msg;
        msg << "top_eigenpairs: count " << count << " outside [1, " << m.dim() << "]";
        throw ValidationError(msg.str());
    }
    if (m.dim() > detail::kDenseLimit && static_cast<Eigen::Index>(count) * 4 < m.dim())
        return detail::subspace_top_eigenpairs(m.matrix(), count, tol);

    const SpectralDecomposition full = sym_eig(m);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(m.dim()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return std::abs(full.eigenvalues[a]) > std::abs(full.eigenvalues[b]);
    });
    const auto want = static_cast<Eigen::Index>(count);
    SpectralDecomposition out{Vector(want), Matrix(m.dim(), want)};
    for (Eigen::Index j = 0; j < want; ++j) {
        out.eigenvalues[j] = full.eigenvalues[order[static_cast<std::size_t>(j)]];
        out.eigenvectors.col(j) = full.eigenvectors.col(order[static_cast<std::size_t>(j)]);
    }
    return out;
}

Vector top_singular_values(const SymMatrix& m, std::size_t count)
{
    if (count == 0 || static_cast<Eigen::Index>(count) > m.dim()) {
        std::ostringstream msg;
        msg << "top_singular_values: count " << count << " exceeds dimension " << m.dim();
        throw ValidationError(msg.str());
    }
    Vector mags;
    if (m.dim() > detail::kDenseLimit && static_cast<Eigen::Index>(count) * 4 < m.dim()) {
        // Ritz values converge quadratically in the residual, so a loose
        // residual bound already pins the values far below 1e-8 relative.
        mags = detail::subspace_top_eigenpairs(m.matrix(), count, 1e-7).eigenvalues.cwiseAbs();
    } else {
        mags = sym_eigenvalues(m).cwiseAbs();
        std::sort(mags.begin(), mags.end(), std::greater<>());
    }
    return mags.head(static_cast<Eigen::Index>(count));
}

double operator_norm(Eigen::Index dim, const std::function<Vector(const Vector&)>& apply,
                     const std::function<Vector(const Vector&)>& apply_transpose, double tol)
{
    if (!(tol > 0.0))
        throw ValidationError("operator_norm: tol must be positive");
    if (dim == 0)
        return 0.0;

    Vector v = Vector::Ones(dim) / std::sqrt(static_cast<double>(dim));
    v[0] += 1e-3;
    v.normalize();

    constexpr int kMaxIterations = 10000;
    double previous = -std::numeric_limits<double>::infinity();
    double estimate = 0.0;
    for (int iter = 0; iter < kMaxIterations; ++iter) {
        const Vector w = apply(v);
        // ||M v|| for unit v is the square root of the Rayleigh quotient of M^T M.
        estimate = w.norm();
        if (estimate == 0.0 || std::abs(estimate - previous) < tol)
            return estimate;
        previous = estimate;
        Vector u = apply_transpose(w);
        const double un = u.norm();
        if (un == 0.0)
            return estimate;
        v = u / un;
    }
    throw ConvergenceError("operator_norm: power iteration did not converge in 10000 iterations", v, estimate);
}

double operator_norm(const Matrix& m, double tol)
{
    if (m.rows() != m.cols())
        throw ValidationError("operator_norm: matrix is not square");
    return operator_norm(
        m.rows(), [&](const Vector& x) -> Vector { return m * x; },
        [&](const Vector& x) -> Vector { return m.transpose() * x; }, tol);
}

double operator_norm(const SymMatrix& m, double tol)
{
    const Matrix& a = m.matrix();
    const auto apply = [&](const Vector& x) -> Vector { return a * x; };
    return operator_norm(m.dim(), apply, apply, tol);
}

double soft_threshold(double lambda, double threshold) { return std::max(0.0, std::abs(lambda) - threshold); }

SymMatrix reconstruct(const SpectralDecomposition& d, const std::function<double(double)>& f)
{
    Vector g(d.eigenvalues.size());
    for (Eigen::Index i = 0; i < g.size(); ++i)
        g[i] = f(d.eigenvalues[i]);
    Matrix out = d.eigenvectors * g.asDiagonal() * d.eigenvectors.transpose();
    // Average with the transpose so the result is symmetric to the last bit.
    out = 0.5 * (out + out.transpose()).eval();
    return SymMatrix::assume_symmetric(std::move(out));
}

SymMatrix apply_spectral_function(const SymMatrix& m, double threshold)
{
    if (!(threshold >= 0.0))
        throw ValidationError("apply_spectral_function: threshold must be non-negative");
    return reconstruct(sym_eig(m), [threshold](double lambda) { return soft_threshold(lambda, threshold); });
}

Matrix orthonormalize(const Matrix& columns)
{
    Eigen::HouseholderQR<Matrix> qr(columns);
    return qr.householderQ() * Matrix::Identity(columns.rows(), columns.cols());
}

} // namespace rkm::linalg
