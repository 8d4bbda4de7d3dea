#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rkm/kernels.hpp"
#include "rkm/linalg.hpp"
#include "rkm/model.hpp"

namespace rkm::cluster {

using linalg::Matrix;
using linalg::SymMatrix;
using linalg::Vector;

struct KMeansResult {
    Matrix centers;                               ///< d x k
    std::vector<int> labels;                      ///< one per column of the input
    double cost = 0.0;                            ///< sum of squared distances to assigned centers
    std::vector<std::vector<double>> cost_traces; ///< per restart, cost after every assignment step
    int best_restart = 0;
};

/// k-means on the columns of `points` (d x N). Each restart seeds with
/// k-means++ on its own RNG stream and runs Lloyd steps until the assignment
/// stops changing. A cluster that empties is re-seeded at the point farthest
/// from its current center. The lowest-cost restart wins, ties to the lower
/// restart index. Throws std::logic_error if a Lloyd step ever increases the
/// cost beyond 1e-12 relative.
KMeansResult kmeans(const Matrix& points, int k, int restarts, std::uint64_t seed);

struct ClusteringResult {
    std::vector<int> labels;
    double accuracy = 0.0;
    std::map<std::string, double> diagnostics;
};

/// Fraction of agreeing entries under the best relabelling of `predicted`.
/// Exact over all permutations when both sides use at most 6 labels, greedy
/// matching on the contingency table otherwise.
double align_and_score(const std::vector<int>& predicted, const std::vector<int>& truth);

/// Gaussian-kernel PCA: top-k eigenvectors of the kernel matrix, each scaled
/// to norm sqrt(N), then k-means on the N embedded points.
ClusteringResult kernel_pca_cluster(const model::Dataset& data, const kernels::KernelSpec& spec, int k,
                                    std::uint64_t seed);

enum class ThresholdRule {
    fixed,        ///< s = C2 * delta^4
    spectral_gap, ///< s at the largest ratio |lambda_i| / |lambda_{i+1}|
    bulk_median,  ///< s = median |lambda|
};

enum class DeltaSource { model, override_value, plug_in };

struct CovarianceClusterOptions {
    int k = 2;
    double c1 = 1.0 / 12.0;
    double c2 = 1e-3;
    ThresholdRule rule = ThresholdRule::fixed;
    /// Generating model; when present its delta statistic is used.
    std::optional<model::MixtureModel> model;
    std::optional<double> delta_override;
    /// Run k-means on rows of V diag(f(lambda)) over the surviving
    /// eigenvectors instead of on the N-dimensional columns. Pairwise
    /// distances are the same.
    bool fast_path = false;
    int restarts = 10;
    std::uint64_t seed = 0;
};

/// Projects to the sphere, builds the h_t kernel matrix with t = c1 * delta,
/// soft-thresholds its spectrum and runs k-means on the columns of the
/// result. Throws DegenerateSeparationError when delta is zero; radial_cluster
/// handles that case.
ClusteringResult covariance_cluster(const model::Dataset& data, const CovarianceClusterOptions& options);

/// Eigenvector of the second-largest |lambda| of the h_t kernel matrix of
/// the sphere-projected data, signed so its first nonzero entry is positive.
Vector second_singular_vector(const model::Dataset& data, double t);
Vector second_singular_vector(const SymMatrix& phi);

/// Labels from the sign of each entry: 0 for >= 0, 1 otherwise.
std::vector<int> sign_labels(const Vector& v);

/// One-dimensional k-means on the norms |x_i|.
ClusteringResult radial_cluster(const model::Dataset& data, int k, std::uint64_t seed = 0);

} // namespace rkm::cluster
