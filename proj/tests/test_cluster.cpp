#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "rkm/cluster.hpp"
#include "rkm/error.hpp"
#include "rkm/kernels.hpp"
#include "rkm/model.hpp"

namespace {

using namespace rkm::cluster;
using rkm::kernels::KernelSpec;
using rkm::linalg::Matrix;
using rkm::linalg::SymMatrix;
using rkm::linalg::Vector;
using rkm::model::Dataset;
using rkm::model::FixedPerComponent;

Matrix row(const std::vector<double>& x)
{
    Matrix m(1, static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i)
        m(0, static_cast<Eigen::Index>(i)) = x[i];
    return m;
}

Dataset figure1_sample(Eigen::Index n, double s, std::size_t per, std::uint64_t seed)
{
    return rkm::model::sample(rkm::model::figure1_model(n, s), FixedPerComponent{{per, per}}, seed);
}

// Applies a column permutation to a dataset.
Dataset permuted(const Dataset& d, const std::vector<Eigen::Index>& perm)
{
    Dataset out = d;
    for (std::size_t j = 0; j < perm.size(); ++j) {
        out.points.col(static_cast<Eigen::Index>(j)) = d.points.col(perm[j]);
        out.labels[j] = d.labels[static_cast<std::size_t>(perm[j])];
    }
    return out;
}

TEST(KMeans, FourPointsOnALine)
{
    const std::vector<double> x{0, 1, 9, 10};
    const auto r = kmeans(row(x), 2, 10, 1);
    std::vector<double> centers{r.centers(0, 0), r.centers(0, 1)};
    std::sort(centers.begin(), centers.end());
    EXPECT_NEAR(centers[0], 0.5, 1e-15);
    EXPECT_NEAR(centers[1], 9.5, 1e-15);
    EXPECT_NEAR(r.cost, 1.0, 1e-15);
    EXPECT_NEAR(r.cost, oracle::brute_kmeans_cost(x, 2), 1e-12);
}

TEST(KMeans, MatchesBruteForceOnSmallSets)
{
    std::mt19937_64 gen(2);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x(8);
        for (auto& v : x)
            v = g(gen) + (trial % 2 ? 4.0 * (&v - x.data() > 3) : 0.0);
        const int k = 2 + trial % 2;
        EXPECT_NEAR(kmeans(row(x), k, 10, static_cast<std::uint64_t>(trial)).cost, oracle::brute_kmeans_cost(x, k),
                    1e-9);
    }
}

TEST(KMeans, OneClusterPerPoint)
{
    std::mt19937_64 gen(3);
    const Matrix pts = oracle::random_gaussian(3, 6, gen);
    EXPECT_EQ(kmeans(pts, 6, 3, 4).cost, 0.0);
}

TEST(KMeans, DuplicatedDataDoublesCost)
{
    std::mt19937_64 gen(5);
    Matrix pts = oracle::random_gaussian(2, 30, gen);
    pts.rightCols(15).array() += 6.0;
    Matrix twice(2, 60);
    twice << pts, pts;
    const auto a = kmeans(pts, 2, 10, 6);
    const auto b = kmeans(twice, 2, 10, 6);
    EXPECT_NEAR(b.cost, 2.0 * a.cost, 1e-9);
    auto sorted = [](const Matrix& c) {
        std::vector<double> v{c(0, 0), c(0, 1)};
        std::sort(v.begin(), v.end());
        return v;
    };
    const auto ca = sorted(a.centers), cb = sorted(b.centers);
    EXPECT_NEAR(ca[0], cb[0], 1e-12);
    EXPECT_NEAR(ca[1], cb[1], 1e-12);
}

TEST(KMeans, CostNeverIncreasesAndIsDeterministic)
{
    std::mt19937_64 gen(7);
    const Matrix pts = oracle::random_gaussian(5, 300, gen);
    const auto a = kmeans(pts, 4, 8, 11);
    const auto b = kmeans(pts, 4, 8, 11);
    EXPECT_EQ(a.labels, b.labels);
    EXPECT_EQ(a.cost, b.cost);
    ASSERT_EQ(a.cost_traces.size(), 8u);
    for (const auto& trace : a.cost_traces) {
        ASSERT_FALSE(trace.empty());
        for (std::size_t i = 1; i < trace.size(); ++i)
            EXPECT_LE(trace[i], trace[i - 1] * (1.0 + 1e-12));
    }
    EXPECT_EQ(a.cost, a.cost_traces[static_cast<std::size_t>(a.best_restart)].back());
}

TEST(KMeans, IdenticalPointsDoNotBreakSeeding)
{
    const auto r = kmeans(Matrix::Ones(2, 5), 3, 2, 1);
    EXPECT_EQ(r.cost, 0.0);
    EXPECT_EQ(r.labels.size(), 5u);
}

TEST(KMeans, RejectsBadArguments)
{
    const Matrix pts = Matrix::Zero(2, 3);
    EXPECT_THROW(kmeans(pts, 4, 1, 0), rkm::ValidationError);
    EXPECT_THROW(kmeans(pts, 0, 1, 0), rkm::ValidationError);
    EXPECT_THROW(kmeans(pts, 2, 0, 0), rkm::ValidationError);
}

TEST(AlignAndScore, IdenticalAndComplement)
{
    const std::vector<int> truth{0, 0, 1, 1, 1};
    EXPECT_EQ(align_and_score(truth, truth), 1.0);
    EXPECT_EQ(align_and_score({1, 1, 0, 0, 0}, truth), 1.0);
    EXPECT_NEAR(align_and_score({0, 1, 0, 1, 1}, truth), 0.6, 1e-15);
}

TEST(AlignAndScore, RandomLabelsAreChance)
{
    std::mt19937_64 gen(12);
    std::vector<int> truth(10000), predicted(10000);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        truth[i] = i < 5000 ? 0 : 1;
        predicted[i] = static_cast<int>(gen() % 2);
    }
    EXPECT_NEAR(align_and_score(predicted, truth), 0.5, 0.02);
}

TEST(AlignAndScore, ExactForSixLabelsGreedyBeyond)
{
    std::vector<int> truth, predicted;
    for (int l = 0; l < 6; ++l)
        for (int i = 0; i < 5; ++i) {
            truth.push_back(l);
            predicted.push_back((l + 2) % 6);
        }
    EXPECT_EQ(align_and_score(predicted, truth), 1.0);
    for (int i = 0; i < 5; ++i) {
        truth.push_back(6);
        predicted.push_back(9);
    }
    EXPECT_EQ(align_and_score(predicted, truth), 1.0);
}

TEST(AlignAndScore, RejectsMismatchedInput)
{
    EXPECT_THROW(align_and_score({0, 1}, {0}), rkm::ValidationError);
    EXPECT_THROW(align_and_score({}, {}), rkm::ValidationError);
}

TEST(KernelPca, SeparatedUnitGaussians)
{
    const auto data = rkm::model::sample(rkm::model::two_gaussians(200, 10.0), FixedPerComponent{{200, 200}}, 1);
    const auto r = kernel_pca_cluster(data, KernelSpec::gaussian(std::sqrt(200.0)), 2, 1);
    EXPECT_GE(r.accuracy, 0.9);
    EXPECT_TRUE(r.diagnostics.count("eigen_gap"));
    EXPECT_TRUE(r.diagnostics.count("max_angle"));
}

TEST(KernelPca, SingleClusterIsTrivial)
{
    const auto data = rkm::model::sample(rkm::model::two_gaussians(20, 0.0), FixedPerComponent{{50, 0}}, 2);
    const auto r = kernel_pca_cluster(data, KernelSpec::gaussian(std::sqrt(20.0)), 1, 2);
    EXPECT_EQ(r.accuracy, 1.0);
    for (int l : r.labels)
        EXPECT_EQ(l, r.labels.front());
}

TEST(KernelPca, CoincidentCentersAreChance)
{
    const auto data = rkm::model::sample(rkm::model::two_gaussians(200, 0.0), FixedPerComponent{{200, 200}}, 3);
    const auto r = kernel_pca_cluster(data, KernelSpec::gaussian(std::sqrt(200.0)), 2, 3);
    EXPECT_GE(r.accuracy, 0.4);
    EXPECT_LE(r.accuracy, 0.6);
}

TEST(KernelPca, RejectsNonPositiveDefiniteKernel)
{
    const auto data = rkm::model::sample(rkm::model::two_gaussians(5, 2.0), FixedPerComponent{{5, 5}}, 4);
    EXPECT_THROW(kernel_pca_cluster(data, KernelSpec::distance(), 2, 1), rkm::ValidationError);
}

TEST(KernelPca, RotationInvariant)
{
    const auto data = rkm::model::sample(rkm::model::two_gaussians(30, 6.0), FixedPerComponent{{60, 60}}, 5);
    std::mt19937_64 gen(6);
    Dataset rotated = data;
    rotated.points = oracle::random_rotation(30, gen) * data.points;
    const auto spec = KernelSpec::gaussian(std::sqrt(30.0));
    const auto a = kernel_pca_cluster(data, spec, 2, 7);
    const auto b = kernel_pca_cluster(rotated, spec, 2, 7);
    EXPECT_NEAR(a.accuracy, b.accuracy, 1e-9);
    EXPECT_NEAR(a.diagnostics.at("kmeans_cost"), b.diagnostics.at("kmeans_cost"), 1e-9);
}

TEST(CovarianceCluster, Figure1Hundred)
{
    const auto model = rkm::model::figure1_model(100, 0.6);
    const auto data = rkm::model::sample(model, FixedPerComponent{{100, 100}}, 1);
    CovarianceClusterOptions opt;
    opt.model = model;
    opt.seed = 1;
    const auto r = covariance_cluster(data, opt);
    EXPECT_GE(r.accuracy, 0.95);
    EXPECT_NEAR(r.diagnostics.at("delta"), 1.2, 1e-12);
    EXPECT_NEAR(r.diagnostics.at("t"), 0.1, 1e-12);
    EXPECT_NEAR(r.diagnostics.at("threshold"), 1e-3 * std::pow(1.2, 4), 1e-15);
}

TEST(CovarianceCluster, Figure1Thousand)
{
    const auto model = rkm::model::figure1_model(1000, 0.33);
    const auto data = rkm::model::sample(model, FixedPerComponent{{1000, 1000}}, 1);
    CovarianceClusterOptions opt;
    opt.model = model;
    opt.c2 = 0.003;
    opt.fast_path = true;
    opt.seed = 1;
    EXPECT_GE(covariance_cluster(data, opt).accuracy, 0.95);
}

TEST(CovarianceCluster, PlugInDeltaWorks)
{
    const auto data = figure1_sample(100, 0.6, 100, 2);
    CovarianceClusterOptions opt;
    opt.seed = 2;
    const auto r = covariance_cluster(data, opt);
    EXPECT_EQ(r.diagnostics.at("delta_source"), static_cast<double>(DeltaSource::plug_in));
    EXPECT_GE(r.accuracy, 0.95);
}

TEST(CovarianceCluster, FastPathMatchesFullColumns)
{
    const auto model = rkm::model::figure1_model(40, 0.6);
    const auto data = rkm::model::sample(model, FixedPerComponent{{60, 60}}, 3);
    CovarianceClusterOptions opt;
    opt.model = model;
    opt.seed = 3;
    const auto full = covariance_cluster(data, opt);
    opt.fast_path = true;
    const auto fast = covariance_cluster(data, opt);
    EXPECT_EQ(full.labels, fast.labels);
    EXPECT_NEAR(full.diagnostics.at("kmeans_cost"), fast.diagnostics.at("kmeans_cost"),
                1e-10 * std::max(1.0, full.diagnostics.at("kmeans_cost")));
}

// With C2 calibrated to the n = 100 spectrum, only the top eigenvalue and
// the separating one clear the threshold.
TEST(CovarianceCluster, SurvivorsAtMostKAtCalibratedThreshold)
{
    const auto model = rkm::model::figure1_model(100, 0.6);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto data = rkm::model::sample(model, FixedPerComponent{{100, 100}}, seed);
        CovarianceClusterOptions opt;
        opt.model = model;
        opt.c2 = 0.0018;
        opt.fast_path = true;
        opt.seed = seed;
        EXPECT_LE(covariance_cluster(data, opt).diagnostics.at("surviving"), 2.0) << "seed " << seed;
    }
}

TEST(CovarianceCluster, IdenticalComponentsAreChance)
{
    const auto data = figure1_sample(100, 0.0, 100, 4);
    CovarianceClusterOptions opt;
    opt.delta_override = 1.2;
    opt.c2 = 0.0018;
    opt.seed = 4;
    const auto r = covariance_cluster(data, opt);
    EXPECT_LE(r.diagnostics.at("surviving"), 1.0);
    EXPECT_GE(r.accuracy, 0.4);
    EXPECT_LE(r.accuracy, 0.65);
}

TEST(CovarianceCluster, ThresholdAboveNormGivesZeroMatrix)
{
    const auto model = rkm::model::figure1_model(20, 0.6);
    const auto data = rkm::model::sample(model, FixedPerComponent{{30, 30}}, 5);
    CovarianceClusterOptions opt;
    opt.model = model;
    opt.c2 = 100.0;
    const auto r = covariance_cluster(data, opt);
    EXPECT_EQ(r.diagnostics.at("surviving"), 0.0);
    EXPECT_EQ(r.diagnostics.at("kmeans_cost"), 0.0);
    EXPECT_NEAR(r.accuracy, 0.5, 1e-12);
}

TEST(CovarianceCluster, ScalingOnlyModelAdvisesRadialFallback)
{
    const auto model = rkm::model::isotropic_scales(10, {1.0, 4.0});
    const auto data = rkm::model::sample(model, FixedPerComponent{{10, 10}}, 6);
    CovarianceClusterOptions opt;
    opt.model = model;
    try {
        covariance_cluster(data, opt);
        FAIL() << "expected DegenerateSeparationError";
    } catch (const rkm::DegenerateSeparationError& e) {
        EXPECT_NE(std::string(e.what()).find("radial"), std::string::npos);
    }
}

TEST(CovarianceCluster, RejectsBadOptions)
{
    const auto data = figure1_sample(10, 0.5, 10, 7);
    CovarianceClusterOptions opt;
    opt.delta_override = 1.0;
    opt.k = 1;
    EXPECT_THROW(covariance_cluster(data, opt), rkm::ValidationError);
    opt.k = 2;
    opt.c1 = 0.0;
    EXPECT_THROW(covariance_cluster(data, opt), rkm::ValidationError);
}

TEST(SecondSingularVector, Figure1SignsClassify)
{
    const auto data = figure1_sample(100, 0.6, 100, 1);
    const Vector v = second_singular_vector(data, 0.1);
    EXPECT_GE(align_and_score(sign_labels(v), data.labels), 0.95);
}

TEST(SecondSingularVector, BlockConstantMatrixGivesStepVector)
{
    // Blocks of 3 and 5 with block values chosen so both eigenvalues are nonzero.
    Matrix m(8, 8);
    for (Eigen::Index i = 0; i < 8; ++i)
        for (Eigen::Index j = 0; j < 8; ++j)
            m(i, j) = (i < 3 && j < 3) ? 0.9 : (i >= 3 && j >= 3) ? 0.6 : 0.1;
    const Vector v = second_singular_vector(SymMatrix{m});
    for (Eigen::Index i = 1; i < 3; ++i)
        EXPECT_NEAR(v[i], v[0], 1e-12);
    for (Eigen::Index i = 4; i < 8; ++i)
        EXPECT_NEAR(v[i], v[3], 1e-12);
    EXPECT_LT(v[0] * v[3], 0.0);
    EXPECT_GT(v[0], 0.0);
}

// The sign convention picks the first nonzero entry, which moves under
// permutation, so equivariance holds up to a global sign.
TEST(SecondSingularVector, PermutationEquivariantUpToSign)
{
    const auto data = figure1_sample(20, 0.6, 20, 8);
    std::vector<Eigen::Index> perm(40);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 gen(9);
    std::shuffle(perm.begin(), perm.end(), gen);
    const Vector a = second_singular_vector(data, 0.1);
    const Vector b = second_singular_vector(permuted(data, perm), 0.1);
    Vector a_perm(40);
    for (Eigen::Index j = 0; j < 40; ++j)
        a_perm[j] = a[perm[static_cast<std::size_t>(j)]];
    const double sign = a_perm.dot(b) >= 0.0 ? 1.0 : -1.0;
    EXPECT_LE((sign * a_perm - b).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_GT(b[0], 0.0);
}

TEST(SignLabels, ZeroCountsAsNonNegative)
{
    EXPECT_EQ(sign_labels(Vector{{0.5, 0.0, -1e-300}}), (std::vector<int>{0, 0, 1}));
}

TEST(RadialCluster, DifferentScalesSeparate)
{
    const auto data =
        rkm::model::sample(rkm::model::isotropic_scales(100, {1.0, 4.0}), FixedPerComponent{{200, 200}}, 10);
    EXPECT_GE(radial_cluster(data, 2, 10).accuracy, 0.95);
}

TEST(RadialCluster, EqualScalesAreChance)
{
    const auto data =
        rkm::model::sample(rkm::model::isotropic_scales(100, {1.0, 1.0}), FixedPerComponent{{500, 500}}, 11);
    const double acc = radial_cluster(data, 2, 11).accuracy;
    EXPECT_GE(acc, 0.45);
    EXPECT_LE(acc, 0.6);
}

TEST(RadialCluster, AccuracyFallsAsScalesMerge)
{
    double previous = 1.0;
    for (double ratio : {4.0, 1.5, 1.2, 1.08, 1.0}) {
        double acc = 0.0;
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            const auto data = rkm::model::sample(rkm::model::isotropic_scales(100, {1.0, ratio}),
                                                 FixedPerComponent{{400, 400}}, seed);
            acc += radial_cluster(data, 2, seed).accuracy / 3.0;
        }
        EXPECT_LE(acc, previous + 0.02) << "ratio " << ratio;
        previous = acc;
    }
    EXPECT_LE(previous, 0.6);
}

TEST(RadialCluster, NeedsTwoClusters)
{
    const auto data = figure1_sample(4, 0.5, 5, 12);
    EXPECT_THROW(radial_cluster(data, 1), rkm::ValidationError);
}

} // namespace
