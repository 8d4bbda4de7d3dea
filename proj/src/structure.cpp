#include "rkm/structure.hpp"

#include "rkm/error.hpp"
#include "rkm/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace rkm::structure {
namespace {

using Bounds = std::vector<std::pair<Eigen::Index, Eigen::Index>>;

void check_blocks(const kernels::KernelMatrix& km, const char* who)
{
    if (km.block_bounds.empty())
        throw ValidationError(std::string(who) + ": kernel matrix carries no block structure");
    for (std::size_t b = 0; b < km.block_bounds.size(); ++b)
        if (km.block_bounds[b].second <= km.block_bounds[b].first) {
            std::ostringstream msg;
            msg << who << ": block " << b << " is empty";
            throw ValidationError(msg.str());
        }
}

// Sum of v over each block.
Vector block_sums(const Bounds& blocks, const Vector& v)
{
    Vector s(static_cast<Eigen::Index>(blocks.size()));
    for (std::size_t b = 0; b < blocks.size(); ++b)
        s[static_cast<Eigen::Index>(b)] = v.segment(blocks[b].first, blocks[b].second - blocks[b].first).sum();
    return s;
}

// Copies per-block values onto the rows of each block.
Vector expand(const Bounds& blocks, const Vector& per_block, Eigen::Index size)
{
    Vector out(size);
    for (std::size_t b = 0; b < blocks.size(); ++b)
        out.segment(blocks[b].first, blocks[b].second - blocks[b].first).setConstant(per_block[static_cast<Eigen::Index>(b)]);
    return out;
}

} // namespace

Eigen::Index BlockApproximant::size() const { return block_bounds.empty() ? 0 : block_bounds.back().second; }

Matrix BlockApproximant::materialize() const
{
    const Eigen::Index n = size();
    Matrix out(n, n);
    for (std::size_t i = 0; i < block_bounds.size(); ++i) {
        const auto [r0, r1] = block_bounds[i];
        for (std::size_t j = 0; j < block_bounds.size(); ++j) {
            const auto [c0, c1] = block_bounds[j];
            const auto bi = static_cast<Eigen::Index>(i);
            const auto bj = static_cast<Eigen::Index>(j);
            if (kind == ApproximantKind::block_constant) {
                out.block(r0, c0, r1 - r0, c1 - c0).setConstant(block_means(bi, bj));
                continue;
            }
            for (Eigen::Index y = c0; y < c1; ++y)
                for (Eigen::Index x = r0; x < r1; ++x)
                    out(x, y) = col_means(x, bj) + row_means(y, bi) - block_means(bi, bj);
        }
    }
    return out;
}

Vector BlockApproximant::apply(const Vector& v) const
{
    const Eigen::Index n = size();
    if (v.size() != n)
        throw ValidationError("BlockApproximant::apply: size mismatch");
    const Vector s = block_sums(block_bounds, v);
    if (kind == ApproximantKind::block_constant)
        return expand(block_bounds, block_means * s, n);
    // (A v)(x) = sum_j col_means(x, j) s_j + sum_y row_means(y, i) v_y - sum_j block_means(i, j) s_j
    return col_means * s + expand(block_bounds, row_means.transpose() * v - block_means * s, n);
}

Vector BlockApproximant::apply_transpose(const Vector& v) const
{
    const Eigen::Index n = size();
    if (v.size() != n)
        throw ValidationError("BlockApproximant::apply_transpose: size mismatch");
    const Vector s = block_sums(block_bounds, v);
    if (kind == ApproximantKind::block_constant)
        return expand(block_bounds, block_means.transpose() * s, n);
    return row_means * s + expand(block_bounds, col_means.transpose() * v - block_means.transpose() * s, n);
}

BlockApproximant approximant_A(const kernels::KernelMatrix& km)
{
    check_blocks(km, "approximant_A");
    const Matrix& m = km.matrix.matrix();
    const Eigen::Index n = km.size();
    const auto k = static_cast<Eigen::Index>(km.block_bounds.size());

    BlockApproximant out{ApproximantKind::row_plus_column, km.block_bounds, Matrix(k, k), Matrix(n, k), Matrix(n, k)};
    parallel_for(0, static_cast<std::size_t>(k), [&](std::size_t b) {
        const auto [lo, hi] = km.block_bounds[b];
        const auto j = static_cast<Eigen::Index>(b);
        const double width = static_cast<double>(hi - lo);
        out.col_means.col(j) = m.middleCols(lo, hi - lo).rowwise().sum() / width;
        out.row_means.col(j) = m.middleRows(lo, hi - lo).colwise().sum().transpose() / width;
    });
    for (Eigen::Index i = 0; i < k; ++i) {
        const auto [lo, hi] = km.block_bounds[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < k; ++j)
            out.block_means(i, j) = out.col_means.col(j).segment(lo, hi - lo).mean();
    }
    return out;
}

BlockApproximant approximant_B(const kernels::KernelMatrix& km)
{
    check_blocks(km, "approximant_B");
    const Matrix& m = km.matrix.matrix();
    const auto k = static_cast<Eigen::Index>(km.block_bounds.size());
    BlockApproximant out{ApproximantKind::block_constant, km.block_bounds, Matrix(k, k), Matrix(), Matrix()};
    parallel_for(0, static_cast<std::size_t>(k * k), [&](std::size_t p) {
        const auto i = static_cast<Eigen::Index>(p) / k;
        const auto j = static_cast<Eigen::Index>(p) % k;
        const auto [r0, r1] = km.block_bounds[static_cast<std::size_t>(i)];
        const auto [c0, c1] = km.block_bounds[static_cast<std::size_t>(j)];
        out.block_means(i, j) = m.block(r0, c0, r1 - r0, c1 - c0).mean();
    });
    return out;
}

double residual_norm(const kernels::KernelMatrix& km, const BlockApproximant& approx)
{
    if (approx.size() != km.size())
        throw ValidationError("residual_norm: approximant and kernel matrix differ in size");
    const Matrix& m = km.matrix.matrix();
    return linalg::operator_norm(
        km.size(), [&](const Vector& v) -> Vector { return m * v - approx.apply(v); },
        [&](const Vector& v) -> Vector { return m * v - approx.apply_transpose(v); }, 1e-8);
}

EigenvalueCount count_large_eigenvalues(const SymMatrix& m, double threshold)
{
    if (!(threshold > 0.0))
        throw ValidationError("count_large_eigenvalues: threshold must be positive");
    EigenvalueCount out;
    if (m.dim() == 0)
        return out;
    const Vector values = linalg::sym_eigenvalues(m);
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        if (values[i] > threshold)
            ++out.above;
        else if (values[i] < -threshold)
            ++out.below;
    }
    return out;
}

EigenvalueCount count_large_eigenvalues(const kernels::KernelMatrix& km, double threshold)
{
    return count_large_eigenvalues(km.matrix, threshold);
}

Matrix indicator_basis(const std::vector<int>& labels)
{
    std::map<int, Eigen::Index> columns;
    for (int l : labels)
        columns.emplace(l, 0);
    Eigen::Index next = 0;
    for (auto& [label, col] : columns)
        col = next++;
    Matrix e = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), next);
    for (std::size_t x = 0; x < labels.size(); ++x)
        e(static_cast<Eigen::Index>(x), columns[labels[x]]) = 1.0;
    for (Eigen::Index c = 0; c < next; ++c)
        e.col(c).normalize();
    return e;
}

EigenspaceAngle principal_angles(const Matrix& eigvecs, const std::vector<int>& labels)
{
    const Eigen::Index n = eigvecs.rows();
    const Eigen::Index k = eigvecs.cols();
    if (static_cast<Eigen::Index>(labels.size()) != n)
        throw ValidationError("principal_angles: label count does not match eigenvector length");
    if (k < 1 || k > n)
        throw ValidationError("principal_angles: need between 1 and N vectors");

    const Eigen::ColPivHouseholderQR<Matrix> qr(eigvecs);
    const double tol = 1e-10 * std::max(1.0, eigvecs.cwiseAbs().maxCoeff());
    const Matrix r = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < k; ++i)
        if (std::abs(r(i, i)) <= tol * std::sqrt(static_cast<double>(n)))
            throw ValidationError("principal_angles: eigenvector set is rank deficient");
    const Matrix q = qr.householderQ() * Matrix::Identity(n, k);

    const Matrix cross = q.transpose() * indicator_basis(labels);
    // Squared cosines are the eigenvalues of the smaller Gram matrix.
    const Matrix small = cross.rows() <= cross.cols() ? Matrix(cross * cross.transpose()) : Matrix(cross.transpose() * cross);
    const Vector cos2 = linalg::sym_eigenvalues(SymMatrix::assume_symmetric(0.5 * (small + small.transpose())));

    EigenspaceAngle out{Vector(cos2.size())};
    for (Eigen::Index i = 0; i < cos2.size(); ++i) {
        const double c = std::clamp(std::sqrt(std::max(cos2[i], 0.0)), 0.0, 1.0);
        out.angles[i] = std::acos(c);
    }
    std::sort(out.angles.begin(), out.angles.end(), std::greater<>());
    return out;
}

} // namespace rkm::structure
