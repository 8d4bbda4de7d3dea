#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include "rkm/linalg.hpp"

namespace rkm::model {

using linalg::Matrix;
using linalg::Vector;

struct Isotropic {
    double variance = 1.0;
};
struct Diagonal {
    Vector variances;
};
struct Full {
    Matrix matrix;
};
using Covariance = std::variant<Isotropic, Diagonal, Full>;

/// Dense n x n form of a covariance description.
Matrix covariance_matrix(const Covariance& cov, Eigen::Index dim);
double covariance_trace(const Covariance& cov, Eigen::Index dim);
/// Sum of two covariances, staying diagonal when both are.
Covariance covariance_sum(const Covariance& a, const Covariance& b, Eigen::Index dim);

struct GaussianComponent {
    double weight = 1.0;
    Vector mean;
    Covariance covariance;

    /// Non-centered second moment Sigma + mu mu^T.
    Matrix second_moment() const;
};

/// Mixture of Gaussians in dimension `dim`. Weights sum to one; a zero weight
/// is allowed and simply never produces samples.
class MixtureModel {
public:
    MixtureModel(Eigen::Index dim, std::vector<GaussianComponent> components);

    Eigen::Index dim() const { return dim_; }
    std::size_t size() const { return components_.size(); }
    const std::vector<GaussianComponent>& components() const { return components_; }
    const GaussianComponent& operator[](std::size_t i) const { return components_[i]; }

    /// Smallest component radius, min_i sqrt(trace Sigma_i).
    double radius() const;

private:
    Eigen::Index dim_;
    std::vector<GaussianComponent> components_;
};

/// Sample points as columns (n x N) with the generating component of each
/// column. Columns are grouped by component in increasing label order.
struct Dataset {
    Matrix points;
    std::vector<int> labels;
    std::uint64_t seed = 0;

    Eigen::Index dim() const { return points.rows(); }
    Eigen::Index size() const { return points.cols(); }
    /// Number of components the labels refer to (max label + 1).
    int label_count() const;
    /// [begin, end) column range of each label; empty ranges for absent labels.
    /// Throws ValidationError unless labels are nondecreasing.
    std::vector<std::pair<Eigen::Index, Eigen::Index>> blocks() const;
};

/// Total size drawn multinomially from the weights.
struct FixedTotal {
    std::size_t total;
};
/// Exact count per component.
struct FixedPerComponent {
    std::vector<std::size_t> counts;
};
/// Total size ~ Poisson(mean); component counts are independent
/// Poisson(w_i * mean) draws.
struct PoissonTotal {
    double mean;
};
using SizeMode = std::variant<FixedTotal, FixedPerComponent, PoissonTotal>;

Dataset sample(const MixtureModel& model, const SizeMode& mode, std::uint64_t seed);

/// Closest-point projection onto the sphere of radius sqrt(n).
Dataset project_to_sphere(const Dataset& data);

/// Two equal-weight centered Gaussians with diagonal covariances: the first
/// has variance 1+s on the first n/2 coordinates and 1-s on the rest, the
/// second the reverse. s = 0 is accepted and gives two identical standard
/// Gaussians.
MixtureModel figure1_model(Eigen::Index n, double s);

/// Two unit-covariance Gaussians whose means are +-separation/2 along e_1.
MixtureModel two_gaussians(Eigen::Index n, double separation);

/// Centered isotropic Gaussians with the given variances and equal weights.
MixtureModel isotropic_scales(Eigen::Index n, const std::vector<double>& variances);

} // namespace rkm::model
