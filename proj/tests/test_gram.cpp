#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "rkm/error.hpp"
#include "rkm/gram.hpp"
#include "rkm/kernels.hpp"
#include "rkm/model.hpp"

namespace {

using namespace rkm::gram;
using namespace rkm::model;
using rkm::linalg::Matrix;
using rkm::linalg::Vector;

TEST(GaussianExpectation, IdentityCovariance)
{
    EXPECT_NEAR(gaussian_expectation(Vector::Zero(2), Isotropic{1.0}, 1.0), 0.5, 1e-15);
}

TEST(GaussianExpectation, DoubledCovariance)
{
    EXPECT_NEAR(gaussian_expectation(Vector::Zero(2), Isotropic{2.0}, 1.0), 1.0 / 3.0, 1e-15);
}

// |mu|^2 = 2, Sigma = I, tau = 1: (1/2) exp(-mu^T (2I)^-1 mu / 2) = exp(-1/2) / 2.
TEST(GaussianExpectation, ShiftedMeanAgainstMonteCarlo)
{
    const Vector mu{{1.0, 1.0}};
    const double closed = gaussian_expectation(mu, Isotropic{1.0}, 1.0);
    EXPECT_NEAR(closed, 0.5 * std::exp(-0.5), 1e-15);
    std::mt19937_64 gen(1);
    const double mc = oracle::mc_gaussian_expectation(mu, Matrix::Identity(2, 2), 1.0, 1000000, gen);
    EXPECT_NEAR(mc / closed, 1.0, 0.01);
}

TEST(GaussianExpectation, CovarianceFormsAgree)
{
    std::mt19937_64 gen(2);
    const Vector mu = oracle::random_gaussian(5, 1, gen).col(0);
    const Vector d{{0.5, 1.0, 2.0, 0.1, 3.0}};
    const Matrix full = d.asDiagonal();
    const double a = gaussian_expectation(mu, Diagonal{d}, 1.7);
    const double b = gaussian_expectation(mu, Full{full}, 1.7);
    EXPECT_NEAR(a, b, 1e-14);
    const double c = gaussian_expectation(mu, Isotropic{0.8}, 2.0);
    const double e = gaussian_expectation(mu, Diagonal{Vector::Constant(5, 0.8)}, 2.0);
    EXPECT_NEAR(c, e, 1e-15);
}

TEST(GaussianExpectation, SingularCovarianceIsFine)
{
    Matrix cov = Matrix::Zero(3, 3);
    cov(0, 0) = 1.0;
    const Vector mu{{0.0, 1.0, 0.0}};
    // Only the first coordinate fluctuates; the second contributes exp(-1/2).
    const double expected = std::pow(2.0, -0.5) * std::exp(-0.5);
    EXPECT_NEAR(gaussian_expectation(mu, Full{cov}, 1.0), expected, 1e-14);
}

TEST(GaussianExpectation, RandomFullCovarianceAgainstMonteCarlo)
{
    std::mt19937_64 gen(3);
    for (int trial = 0; trial < 3; ++trial) {
        const Eigen::Index n = 3 + trial * 4;
        const Matrix a = oracle::random_gaussian(n, n, gen) / std::sqrt(double(n));
        const Matrix cov = a * a.transpose();
        const Vector mu = oracle::random_gaussian(n, 1, gen).col(0) * 0.5;
        const double tau = std::sqrt(double(n));
        const double closed = gaussian_expectation(mu, Full{cov}, tau);
        const double mc = oracle::mc_gaussian_expectation(mu, cov, tau, 400000, gen);
        EXPECT_NEAR(mc / closed, 1.0, 0.01);
    }
}

TEST(GaussianExpectation, RejectsBadTau)
{
    EXPECT_THROW(gaussian_expectation(Vector::Zero(2), Isotropic{1.0}, 0.0), rkm::ValidationError);
}

TEST(ClosedFormGram, IdenticalStandardComponents)
{
    const MixtureModel m(2, {GaussianComponent{0.5, Vector::Zero(2), Isotropic{1.0}},
                             GaussianComponent{0.5, Vector::Zero(2), Isotropic{1.0}}});
    const auto g = closed_form_gram(m, 1.0);
    EXPECT_EQ(g.source, GramSource::closed_form);
    EXPECT_LE((g.matrix.matrix().array() - 1.0 / 3.0).abs().maxCoeff(), 1e-15);
}

// Off-diagonal / diagonal = exp(-d^2 / (2 (2 + tau^2))) for unit covariances.
TEST(ClosedFormGram, SeparatedUnitGaussians)
{
    for (double d : {0.5, 2.0, 5.0})
        for (double tau : {1.0, 3.0}) {
            const auto g = closed_form_gram(two_gaussians(6, d), tau).matrix;
            EXPECT_NEAR(g(0, 1) / g(0, 0), std::exp(-d * d / (2.0 * (2.0 + tau * tau))), 1e-14);
            EXPECT_EQ(g(0, 0), g(1, 1));
        }
    std::mt19937_64 gen(4);
    const auto m = two_gaussians(3, 2.0);
    const double closed = closed_form_gram(m, 1.5).matrix(0, 1);
    const double mc = oracle::mc_gaussian_expectation(m[0].mean - m[1].mean, 2.0 * Matrix::Identity(3, 3), 1.5,
                                                      1000000, gen);
    EXPECT_NEAR(mc / closed, 1.0, 0.01);
}

TEST(ClosedFormGram, Figure1ModelAgainstMonteCarlo)
{
    const auto m = figure1_model(4, 0.5);
    const auto g = closed_form_gram(m, 2.0).matrix;
    std::mt19937_64 gen(5);
    for (int i = 0; i < 2; ++i)
        for (int j = i; j < 2; ++j) {
            const Matrix cov = covariance_matrix(m[i].covariance, 4) + covariance_matrix(m[j].covariance, 4);
            const double mc = oracle::mc_gaussian_expectation(Vector::Zero(4), cov, 2.0, 1000000, gen);
            EXPECT_NEAR(mc / g(i, j), 1.0, 0.01);
        }
}

TEST(ClosedFormGram, PositiveSemidefinite)
{
    const MixtureModel m(3, {GaussianComponent{0.3, Vector{{0, 0, 0}}, Isotropic{1.0}},
                             GaussianComponent{0.3, Vector{{1, 0, 0}}, Diagonal{Vector{{2, 1, 0.5}}}},
                             GaussianComponent{0.4, Vector{{0, 3, 0}}, Isotropic{0.2}}});
    EXPECT_GE(rkm::linalg::sym_eigenvalues(closed_form_gram(m, 1.0).matrix).minCoeff(), -1e-8);
}

TEST(EmpiricalGram, ConstantSingleBlock)
{
    const Matrix k = Matrix::Constant(4, 4, 0.7 / 4.0);
    const auto km = rkm::kernels::with_blocks(rkm::linalg::SymMatrix{k}, {{0, 4}});
    const auto g = empirical_gram(km);
    EXPECT_EQ(g.source, GramSource::empirical);
    ASSERT_EQ(g.matrix.dim(), 1);
    EXPECT_NEAR(g.matrix(0, 0), 0.7, 1e-15);
}

TEST(EmpiricalGram, CloseToClosedFormForLargeSamples)
{
    const auto m = two_gaussians(10, 2.0);
    const double tau = std::sqrt(10.0);
    const auto data = sample(m, FixedPerComponent{{2000, 2000}}, 6);
    const auto km = rkm::kernels::kernel_matrix(data, rkm::kernels::KernelSpec::gaussian(tau));
    const Matrix emp = empirical_gram(km).matrix.matrix();
    const Matrix ref = closed_form_gram(m, tau).matrix.matrix();
    EXPECT_LE((emp.array() / ref.array() - 1.0).abs().maxCoeff(), 0.05);
}

TEST(EmpiricalGram, InvariantUnderWithinBlockPermutation)
{
    auto data = sample(figure1_model(6, 0.5), FixedPerComponent{{15, 20}}, 7);
    const auto spec = rkm::kernels::KernelSpec::gaussian(2.0);
    const Matrix before = empirical_gram(rkm::kernels::kernel_matrix(data, spec)).matrix.matrix();
    std::mt19937_64 gen(8);
    std::vector<Eigen::Index> perm0(15), perm1(20);
    std::iota(perm0.begin(), perm0.end(), 0);
    std::iota(perm1.begin(), perm1.end(), 15);
    std::shuffle(perm0.begin(), perm0.end(), gen);
    std::shuffle(perm1.begin(), perm1.end(), gen);
    Matrix shuffled(data.points.rows(), data.points.cols());
    for (Eigen::Index j = 0; j < 15; ++j)
        shuffled.col(j) = data.points.col(perm0[static_cast<std::size_t>(j)]);
    for (Eigen::Index j = 0; j < 20; ++j)
        shuffled.col(15 + j) = data.points.col(perm1[static_cast<std::size_t>(j)]);
    data.points = shuffled;
    const Matrix after = empirical_gram(rkm::kernels::kernel_matrix(data, spec)).matrix.matrix();
    EXPECT_LE((before - after).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(EmpiricalGram, EmptyBlockThrows)
{
    const auto km = rkm::kernels::with_blocks(rkm::linalg::SymMatrix::identity(3), {{0, 3}, {3, 3}});
    EXPECT_THROW(empirical_gram(km), rkm::ValidationError);
}

TEST(HtSecondOrder, Figure1Entries)
{
    const auto g = gram_ht_second_order(figure1_model(100, 0.6), 0.1);
    EXPECT_EQ(g.source, GramSource::second_order);
    EXPECT_NEAR(g.matrix(0, 0), 0.99320, 1e-12);
    EXPECT_NEAR(g.matrix(1, 1), 0.99320, 1e-12);
    EXPECT_NEAR(g.matrix(0, 1), 0.99680, 1e-12);
}

TEST(HtSecondOrder, DeterminantMatchesLeadingTerm)
{
    const double t = 0.1, s = 0.6;
    const auto m = figure1_model(100, s);
    const double det = gram_ht_second_order(m, t).matrix.matrix().determinant();
    EXPECT_NEAR(det / (-2.0 * t * t * s * s), 1.0, 0.01);
    const Matrix diff = covariance_matrix(m[0].covariance, 100) - covariance_matrix(m[1].covariance, 100);
    EXPECT_NEAR(det / (-(t * t / 200.0) * diff.squaredNorm()), 1.0, 0.01);
}

TEST(HtSecondOrder, ZeroFrequencyIsAllOnes)
{
    const auto g = gram_ht_second_order(figure1_model(10, 0.3), 0.0);
    EXPECT_EQ(g.matrix.matrix(), Matrix::Ones(2, 2));
}

TEST(HtSecondOrder, UsesNonCenteredMoments)
{
    const MixtureModel m(2, {GaussianComponent{0.5, Vector{{1.0, 0.0}}, Isotropic{1.0}},
                             GaussianComponent{0.5, Vector{{0.0, 2.0}}, Full{Matrix::Identity(2, 2)}}});
    const auto g = gram_ht_second_order(m, 0.5);
    // S0 = diag(2, 1), S1 = diag(1, 5): traces 5, 26, 7.
    const double f = 0.25 / 4.0;
    EXPECT_NEAR(g.matrix(0, 0), 1.0 - f * 5.0, 1e-15);
    EXPECT_NEAR(g.matrix(1, 1), 1.0 - f * 26.0, 1e-15);
    EXPECT_NEAR(g.matrix(0, 1), 1.0 - f * 7.0, 1e-15);
}

TEST(WeightedGram, ScalesBySqrtWeights)
{
    const auto g = closed_form_gram(two_gaussians(2, 1.0), 1.0);
    const auto w = weighted_gram(g, {0.25, 0.75});
    EXPECT_NEAR(w(0, 1), g.matrix(0, 1) * std::sqrt(0.25 * 0.75), 1e-15);
    EXPECT_NEAR(w(0, 0), g.matrix(0, 0) * 0.25, 1e-15);
    EXPECT_THROW(weighted_gram(g, {1.0}), rkm::ValidationError);
}

TEST(Delta, Figure1IsTwiceSeparation)
{
    for (Eigen::Index n : {2, 10, 100})
        for (double s : {0.1, 0.6})
            EXPECT_NEAR(delta_statistic(figure1_model(n, s)), 2.0 * s, 1e-12);
}

TEST(Delta, IdenticalAndScaledCovariancesGiveZero)
{
    EXPECT_NEAR(delta_statistic(figure1_model(8, 0.0)), 0.0, 1e-15);
    EXPECT_NEAR(delta_statistic(isotropic_scales(8, {1.0, 2.0})), 0.0, 1e-15);
}

TEST(Delta, NeedsTwoComponents)
{
    const MixtureModel one(2, {GaussianComponent{1.0, Vector::Zero(2), Isotropic{1.0}}});
    EXPECT_THROW(delta_statistic(one), rkm::ValidationError);
}

TEST(Delta, InvariantUnderRotationAndScaling)
{
    std::mt19937_64 gen(9);
    const Eigen::Index n = 6;
    std::vector<GaussianComponent> comps;
    for (int i = 0; i < 3; ++i) {
        const Matrix a = oracle::random_gaussian(n, n, gen);
        comps.push_back({1.0 / 3.0, Vector::Zero(n), Full{Matrix(a * a.transpose())}});
    }
    const double base = delta_statistic(MixtureModel(n, comps));
    const Matrix q = oracle::random_rotation(n, gen);
    auto rotated = comps;
    for (std::size_t i = 0; i < rotated.size(); ++i) {
        const Matrix c = covariance_matrix(comps[i].covariance, n);
        rotated[i].covariance = Full{Matrix(q * c * q.transpose())};
    }
    EXPECT_NEAR(delta_statistic(MixtureModel(n, rotated)), base, 1e-10);
    auto scaled = comps;
    const double factors[] = {0.5, 3.0, 7.0};
    for (std::size_t i = 0; i < scaled.size(); ++i)
        scaled[i].covariance = Full{Matrix(factors[i] * covariance_matrix(comps[i].covariance, n))};
    EXPECT_NEAR(delta_statistic(MixtureModel(n, scaled)), base, 1e-10);
}

TEST(Delta, PlugInEstimateConverges)
{
    const auto data = sample(figure1_model(20, 0.5), FixedPerComponent{{4000, 4000}}, 10);
    EXPECT_NEAR(delta_from_samples(data), 1.0, 0.05);
}

} // namespace
