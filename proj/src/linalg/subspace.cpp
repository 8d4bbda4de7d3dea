#include "detail.hpp"
#include "rkm/error.hpp"
#include "rkm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace rkm::linalg::detail {
namespace {

constexpr int kMaxIterations = 5000;

// Indices of `values` ordered by descending |value|, then descending value,
// then index.
std::vector<Eigen::Index> magnitude_order(const Vector& values)
{
    std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        const double ma = std::abs(values[a]);
        const double mb = std::abs(values[b]);
        if (ma != mb)
            return ma > mb;
        return values[a] > values[b];
    });
    return order;
}

} // namespace

// Block power iteration with a Rayleigh-Ritz step every sweep. The block
// carries extra columns beyond `count` so the convergence rate is governed by
// |lambda_{p+1}| / |lambda_count| rather than by neighbouring eigenvalues.
SpectralDecomposition subspace_top_eigenpairs(const Matrix& m, std::size_t count, double tol)
{
    const Eigen::Index n = m.rows();
    const auto want = static_cast<Eigen::Index>(count);
    const Eigen::Index block = std::min<Eigen::Index>(n, want + std::max<Eigen::Index>(want, 64));

    CounterRng rng(0x5eed, 0x5375);
    Matrix start(n, block);
    for (Eigen::Index j = 0; j < block; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            start(i, j) = rng.normal();
    Matrix q = orthonormalize(start);

    Matrix z(n, block);
    double worst = 0.0;
    for (int iter = 0; iter < kMaxIterations; ++iter) {
        z.noalias() = m * q;
        Matrix h = q.transpose() * z;
        h = 0.5 * (h + h.transpose()).eval();
        const SpectralDecomposition ritz = sym_eig(SymMatrix::assume_symmetric(h));
        const auto order = magnitude_order(ritz.eigenvalues);

        Matrix w(block, block);
        Vector theta(block);
        for (Eigen::Index j = 0; j < block; ++j) {
            w.col(j) = ritz.eigenvectors.col(order[static_cast<std::size_t>(j)]);
            theta[j] = ritz.eigenvalues[order[static_cast<std::size_t>(j)]];
        }
        q = q * w;
        z = z * w;

        const double scale = std::max(std::abs(theta[0]), 1e-300);
        worst = 0.0;
        for (Eigen::Index j = 0; j < want; ++j)
            worst = std::max(worst, (z.col(j) - theta[j] * q.col(j)).norm());
        if (worst <= tol * scale || theta[0] == 0.0) {
            SpectralDecomposition out{theta.head(want), q.leftCols(want)};
            for (Eigen::Index j = 0; j < want; ++j)
                fix_sign(out.eigenvectors.col(j));
            return out;
        }
        q = orthonormalize(z);
    }
    throw ConvergenceError("top_eigenpairs: subspace iteration did not converge", q.col(0), worst);
}

} // namespace rkm::linalg::detail
