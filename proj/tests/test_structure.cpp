#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "rkm/error.hpp"
#include "rkm/gram.hpp"
#include "rkm/kernels.hpp"
#include "rkm/model.hpp"
#include "rkm/structure.hpp"

namespace {

using namespace rkm::structure;
using rkm::kernels::KernelMatrix;
using rkm::kernels::KernelSpec;
using rkm::kernels::with_blocks;
using rkm::linalg::Matrix;
using rkm::linalg::SymMatrix;
using rkm::linalg::Vector;

using Bounds = std::vector<std::pair<Eigen::Index, Eigen::Index>>;

KernelMatrix two_by_two()
{
    Matrix m{{0.0, 1.0}, {1.0, 0.0}}; // [[0, 2], [2, 0]] / N with N = 2
    return with_blocks(SymMatrix{m}, {{0, 2}});
}

std::vector<int> labels_for(const Bounds& blocks)
{
    std::vector<int> labels;
    for (std::size_t b = 0; b < blocks.size(); ++b)
        labels.insert(labels.end(), static_cast<std::size_t>(blocks[b].second - blocks[b].first), static_cast<int>(b));
    return labels;
}

// P K + (I - P) K P, written out with explicit projector matrices.
Matrix projector_A(const Matrix& k, const std::vector<int>& labels)
{
    const Matrix p = oracle::block_projector(labels);
    const Matrix q = Matrix::Identity(k.rows(), k.cols()) - p;
    return p * k + q * k * p;
}

TEST(ApproximantA, TwoByTwoSingleBlock)
{
    const auto km = two_by_two();
    const Matrix a = approximant_A(km).materialize();
    EXPECT_LE((a - Matrix::Constant(2, 2, 0.5)).cwiseAbs().maxCoeff(), 1e-15);
    Matrix residual{{-0.5, 0.5}, {0.5, -0.5}};
    EXPECT_LE((km.matrix.matrix() - a - residual).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_NEAR(residual_norm(km, approximant_A(km)), 1.0, 1e-7);
}

TEST(ApproximantA, BlockConstantInputIsFixedPoint)
{
    const Bounds blocks{{0, 3}, {3, 7}};
    Matrix m(7, 7);
    for (Eigen::Index i = 0; i < 7; ++i)
        for (Eigen::Index j = 0; j < 7; ++j)
            m(i, j) = (i < 3) == (j < 3) ? ((i < 3) ? 0.4 : 0.9) : 0.2;
    const auto km = with_blocks(SymMatrix{m}, blocks);
    EXPECT_LE((approximant_A(km).materialize() - m).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LE((approximant_B(km).materialize() - m).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LE(residual_norm(km, approximant_A(km)), 1e-12);
    EXPECT_LE(residual_norm(km, approximant_B(km)), 1e-12);
}

TEST(ApproximantA, MatchesExplicitProjectorAlgebra)
{
    std::mt19937_64 gen(1);
    for (const Bounds& blocks : {Bounds{{0, 20}}, Bounds{{0, 7}, {7, 20}}, Bounds{{0, 30}, {30, 45}, {45, 100}}}) {
        const Eigen::Index n = blocks.back().second;
        const Matrix m = oracle::random_symmetric(n, gen);
        const auto km = with_blocks(SymMatrix{m}, blocks);
        const Matrix expected = projector_A(m, labels_for(blocks));
        EXPECT_LE((approximant_A(km).materialize() - expected).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(ApproximantA, SingleBlockHasRankAtMostTwo)
{
    std::mt19937_64 gen(2);
    const Matrix m = oracle::random_symmetric(20, gen);
    const Matrix a = approximant_A(with_blocks(SymMatrix{m}, {{0, 20}})).materialize();
    Eigen::JacobiSVD<Matrix> svd(a);
    EXPECT_LE(svd.singularValues()[2], 1e-12 * svd.singularValues()[0]);
}

TEST(ApproximantA, VanishesOnBlockwiseZeroMeanVectors)
{
    std::mt19937_64 gen(3);
    const Bounds blocks{{0, 12}, {12, 30}, {30, 41}};
    const auto labels = labels_for(blocks);
    const Matrix q = Matrix::Identity(41, 41) - oracle::block_projector(labels);
    const auto km = with_blocks(SymMatrix{oracle::random_symmetric(41, gen)}, blocks);
    const Matrix a = approximant_A(km).materialize();
    for (int trial = 0; trial < 50; ++trial) {
        const Vector x = q * oracle::random_gaussian(41, 1, gen).col(0);
        EXPECT_LE(std::abs(x.dot(a * x)), 1e-10 * x.squaredNorm());
    }
}

TEST(Approximant, MatrixFreeProductsMatchMaterialized)
{
    std::mt19937_64 gen(4);
    const Bounds blocks{{0, 5}, {5, 13}, {13, 16}};
    const auto km = with_blocks(SymMatrix{oracle::random_symmetric(16, gen)}, blocks);
    for (const auto& approx : {approximant_A(km), approximant_B(km)}) {
        const Matrix dense = approx.materialize();
        const Vector v = oracle::random_gaussian(16, 1, gen).col(0);
        EXPECT_LE((approx.apply(v) - dense * v).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LE((approx.apply_transpose(v) - dense.transpose() * v).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(ApproximantB, TwoByTwoSingleBlock)
{
    EXPECT_LE((approximant_B(two_by_two()).materialize() - Matrix::Constant(2, 2, 0.5)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ApproximantB, ConsistentWithEmpiricalGram)
{
    const auto data = rkm::model::sample(rkm::model::figure1_model(8, 0.5), rkm::model::FixedPerComponent{{30, 50}}, 5);
    const auto km = rkm::kernels::kernel_matrix(data, KernelSpec::gaussian(3.0));
    const Matrix b = approximant_B(km).materialize();
    const Matrix g = rkm::gram::empirical_gram(km).matrix.matrix();
    const double N = 80.0;
    EXPECT_NEAR(b(0, 0), g(0, 0) / N, 1e-12);
    EXPECT_NEAR(b(0, 79), g(0, 1) / N, 1e-12);
    EXPECT_NEAR(b(79, 79), g(1, 1) / N, 1e-12);
}

TEST(Approximant, EmptyBlockThrows)
{
    const auto km = with_blocks(SymMatrix::identity(3), {{0, 3}, {3, 3}});
    EXPECT_THROW(approximant_A(km), rkm::ValidationError);
    EXPECT_THROW(approximant_B(km), rkm::ValidationError);
}

TEST(ResidualNorm, MatchesDenseNorm)
{
    std::mt19937_64 gen(6);
    const Bounds blocks{{0, 10}, {10, 25}};
    const Matrix m = oracle::random_symmetric(25, gen);
    const auto km = with_blocks(SymMatrix{m}, blocks);
    for (const auto& approx : {approximant_A(km), approximant_B(km)}) {
        Eigen::JacobiSVD<Matrix> svd(m - approx.materialize());
        EXPECT_NEAR(residual_norm(km, approx), svd.singularValues()[0], 1e-6);
    }
}

TEST(ResidualNorm, SmoothedDistanceShrinksWithDimension)
{
    auto mean_residual = [](Eigen::Index n) {
        double total = 0.0;
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const rkm::model::MixtureModel m(n, {rkm::model::GaussianComponent{1.0, Vector::Zero(n),
                                                                                 rkm::model::Isotropic{1.0}}});
            const auto data = rkm::model::sample(m, rkm::model::FixedTotal{static_cast<std::size_t>(4 * n)}, seed);
            const auto km = rkm::kernels::kernel_matrix(data, KernelSpec::smoothed_distance(std::sqrt(double(n))));
            total += residual_norm(km, approximant_B(km));
        }
        return total / 5.0;
    };
    EXPECT_LT(mean_residual(256), mean_residual(64));
}

TEST(ResidualNorm, Figure1HtResidualIsSmall)
{
    const auto data = rkm::model::project_to_sphere(
        rkm::model::sample(rkm::model::figure1_model(100, 0.6), rkm::model::FixedPerComponent{{100, 100}}, 7));
    const auto km = rkm::kernels::kernel_matrix(data, KernelSpec::h_t(0.1, 100));
    EXPECT_LE(residual_norm(km, approximant_B(km)), 0.5);
}

TEST(ResidualNorm, SizeMismatchThrows)
{
    const auto small = with_blocks(SymMatrix::identity(2), {{0, 2}});
    const auto big = with_blocks(SymMatrix::identity(3), {{0, 3}});
    EXPECT_THROW(residual_norm(big, approximant_B(small)), rkm::ValidationError);
}

TEST(CountLargeEigenvalues, DirectCount)
{
    const auto c = count_large_eigenvalues(SymMatrix::diagonal(Vector{{5.0, -5.0, 0.1}}), 1.0);
    EXPECT_EQ(c.above, 1);
    EXPECT_EQ(c.below, 1);
    const auto z = count_large_eigenvalues(SymMatrix::zero(4), 1.0);
    EXPECT_EQ(z.above, 0);
    EXPECT_EQ(z.below, 0);
    EXPECT_THROW(count_large_eigenvalues(SymMatrix::zero(2), 0.0), rkm::ValidationError);
}

TEST(CountLargeEigenvalues, TwoComponentGaussianKernel)
{
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto data =
            rkm::model::sample(rkm::model::two_gaussians(100, 10.0), rkm::model::FixedPerComponent{{200, 200}}, seed);
        const auto km = rkm::kernels::kernel_matrix(data, KernelSpec::gaussian(10.0));
        const double r = residual_norm(km, approximant_A(km));
        EXPECT_LE(count_large_eigenvalues(km, 10.0 * r).above, 2);
    }
}

TEST(PrincipalAngles, IndicatorsGiveZero)
{
    const std::vector<int> labels{0, 0, 0, 1, 1, 2};
    const auto angles = principal_angles(indicator_basis(labels), labels);
    ASSERT_EQ(angles.angles.size(), 3);
    EXPECT_LE(angles.max(), 1e-7);
}

TEST(PrincipalAngles, RotatedBasisOfSameSpanGivesZero)
{
    std::mt19937_64 gen(8);
    const std::vector<int> labels{0, 0, 1, 1, 1};
    const Matrix e = indicator_basis(labels) * oracle::random_rotation(2, gen);
    EXPECT_LE(principal_angles(e, labels).max(), 1e-7);
}

TEST(PrincipalAngles, OrthogonalSpaceGivesRightAngles)
{
    const std::vector<int> labels{0, 0, 1, 1};
    Matrix v(4, 2);
    v << 1, 0, -1, 0, 0, 1, 0, -1;
    v /= std::sqrt(2.0);
    const auto angles = principal_angles(v, labels);
    for (Eigen::Index i = 0; i < 2; ++i)
        EXPECT_NEAR(angles.angles[i], std::numbers::pi / 2.0, 1e-12);
}

TEST(PrincipalAngles, KnownSingleAngle)
{
    // One vector at 30 degrees from the constant vector.
    const std::vector<int> labels{0, 0};
    Vector v(2);
    const double a = std::numbers::pi / 4.0 + std::numbers::pi / 6.0;
    v << std::cos(a), std::sin(a);
    EXPECT_NEAR(principal_angles(v, labels).max(), std::numbers::pi / 6.0, 1e-12);
}

TEST(PrincipalAngles, AnglesSortedAndInRange)
{
    std::mt19937_64 gen(9);
    const std::vector<int> labels{0, 0, 0, 0, 1, 1, 1, 2, 2, 2, 2, 2};
    const auto angles = principal_angles(oracle::random_gaussian(12, 3, gen), labels);
    for (Eigen::Index i = 0; i < angles.angles.size(); ++i) {
        EXPECT_GE(angles.angles[i], 0.0);
        EXPECT_LE(angles.angles[i], std::numbers::pi / 2.0);
        if (i > 0)
            EXPECT_GE(angles.angles[i - 1], angles.angles[i]);
    }
}

TEST(PrincipalAngles, RankDeficientThrows)
{
    Matrix v(4, 2);
    v << 1, 2, 1, 2, 0, 0, 0, 0;
    EXPECT_THROW(principal_angles(v, {0, 0, 1, 1}), rkm::ValidationError);
}

TEST(PrincipalAngles, SeparatedGaussiansTopEigenspaceNearIndicators)
{
    const auto data =
        rkm::model::sample(rkm::model::two_gaussians(200, 10.0), rkm::model::FixedPerComponent{{200, 200}}, 3);
    const auto km = rkm::kernels::kernel_matrix(data, KernelSpec::gaussian(std::sqrt(200.0)));
    const auto top = rkm::linalg::top_eigenpairs(km.matrix, 2);
    EXPECT_LE(principal_angles(top.eigenvectors, data.labels).max(), 0.5);
}

} // namespace
