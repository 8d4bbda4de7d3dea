#include "rkm/cluster.hpp"

#include "rkm/error.hpp"
#include "rkm/gram.hpp"
#include "rkm/structure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rkm::cluster {
namespace {

void check_dataset(const model::Dataset& data, const char* who)
{
    if (data.size() < 1)
        throw ValidationError(std::string(who) + ": dataset is empty");
    if (static_cast<Eigen::Index>(data.labels.size()) != data.size())
        throw ValidationError(std::string(who) + ": label count does not match points");
}

struct Survivors {
    Vector values;  // signed eigenvalues with |lambda| > threshold
    Matrix vectors; // matching eigenvectors
    double threshold = 0.0;
};

Vector magnitudes_descending(const Vector& values)
{
    Vector mags = values.cwiseAbs();
    std::sort(mags.begin(), mags.end(), std::greater<>());
    return mags;
}

Survivors keep_above(const linalg::SpectralDecomposition& d, double threshold)
{
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < d.eigenvalues.size(); ++i)
        if (std::abs(d.eigenvalues[i]) > threshold)
            keep.push_back(i);
    Survivors s{Vector(static_cast<Eigen::Index>(keep.size())), Matrix(d.eigenvectors.rows(), static_cast<Eigen::Index>(keep.size())), threshold};
    for (std::size_t c = 0; c < keep.size(); ++c) {
        s.values[static_cast<Eigen::Index>(c)] = d.eigenvalues[keep[c]];
        s.vectors.col(static_cast<Eigen::Index>(c)) = d.eigenvectors.col(keep[c]);
    }
    return s;
}

// Threshold at the largest ratio between consecutive sorted magnitudes.
double spectral_gap_threshold(const Vector& mags)
{
    double best_ratio = -1.0;
    double threshold = mags.size() ? mags[0] : 0.0;
    for (Eigen::Index i = 0; i + 1 < mags.size(); ++i) {
        if (mags[i] <= 0.0)
            break;
        const double ratio = mags[i + 1] > 0.0 ? mags[i] / mags[i + 1] : std::numeric_limits<double>::infinity();
        if (ratio > best_ratio) {
            best_ratio = ratio;
            threshold = mags[i + 1];
        }
    }
    return threshold;
}

double median(Vector v)
{
    std::sort(v.begin(), v.end());
    const Eigen::Index n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

ClusteringResult kernel_pca_cluster(const model::Dataset& data, const kernels::KernelSpec& spec, int k, std::uint64_t seed)
{
    check_dataset(data, "kernel_pca_cluster");
    if (!spec.positive_definite())
        throw ValidationError("kernel_pca_cluster: kernel " + spec.describe() + " is not positive definite");
    if (k < 1 || k > data.size())
        throw ValidationError("kernel_pca_cluster: k must lie in [1, N]");

    const auto km = kernels::kernel_matrix(data, spec);
    const Eigen::Index want = std::min<Eigen::Index>(data.size(), k + 1);
    const auto top = linalg::top_eigenpairs(km.matrix, static_cast<std::size_t>(want));
    const Matrix vectors = top.eigenvectors.leftCols(k);
    const Matrix embedded = (vectors * std::sqrt(static_cast<double>(data.size()))).transpose();

    const auto km_result = kmeans(embedded, k, 10, seed);
    ClusteringResult out;
    out.labels = km_result.labels;
    out.accuracy = align_and_score(out.labels, data.labels);
    out.diagnostics["kmeans_cost"] = km_result.cost;
    out.diagnostics["lambda_k"] = top.eigenvalues[k - 1];
    if (want > k)
        out.diagnostics["eigen_gap"] = top.eigenvalues[k - 1] - top.eigenvalues[k];
    out.diagnostics["max_angle"] = structure::principal_angles(vectors, data.labels).max();
    return out;
}

ClusteringResult covariance_cluster(const model::Dataset& data, const CovarianceClusterOptions& options)
{
    check_dataset(data, "covariance_cluster");
    if (options.k < 2 || options.k > data.size())
        throw ValidationError("covariance_cluster: k must lie in [2, N]");
    if (!(options.c1 > 0.0) || !(options.c2 > 0.0))
        throw ValidationError("covariance_cluster: C1 and C2 must be positive");

    const model::Dataset projected = model::project_to_sphere(data);

    double delta = 0.0;
    DeltaSource source;
    if (options.model) {
        delta = gram::delta_statistic(*options.model);
        source = DeltaSource::model;
    } else if (options.delta_override) {
        delta = *options.delta_override;
        source = DeltaSource::override_value;
    } else {
        delta = gram::delta_from_samples(data);
        source = DeltaSource::plug_in;
    }
    if (!std::isfinite(delta) || delta < 0.0)
        throw ValidationError("covariance_cluster: delta must be finite and >= 0");
    if (delta <= 1e-12) {
        std::ostringstream msg;
        msg << "covariance_cluster: delta = " << delta
            << "; the components differ at most by scaling, so their trace-normalized covariances coincide. "
               "Cluster by distance to the origin (radial_cluster / --radial) instead.";
        throw DegenerateSeparationError(msg.str());
    }

    const double t = options.c1 * delta;
    const Eigen::Index n = data.dim();
    const auto km = kernels::kernel_matrix(projected, kernels::KernelSpec::h_t(t, n));
    const SymMatrix& phi = km.matrix;

    // Full decomposition: the separating eigenvalue sits just above a dense
    // bulk, where partial iterative solvers converge too slowly.
    const auto full = linalg::sym_eig(phi);
    const Vector mags = magnitudes_descending(full.eigenvalues);
    double threshold = 0.0;
    switch (options.rule) {
    case ThresholdRule::fixed:
        threshold = options.c2 * std::pow(delta, 4);
        break;
    case ThresholdRule::spectral_gap:
        threshold = spectral_gap_threshold(mags);
        break;
    case ThresholdRule::bulk_median:
        threshold = median(mags);
        break;
    }
    const Survivors kept = keep_above(full, threshold);
    const double lambda_max = mags[0];

    const Eigen::Index r = kept.values.size();
    Vector f(r);
    for (Eigen::Index i = 0; i < r; ++i)
        f[i] = linalg::soft_threshold(kept.values[i], kept.threshold);
    // Columns of f_s(Phi) = V diag(f) V^T; with orthonormal V the distances
    // between columns equal those between rows of V diag(f).
    const Matrix scaled = kept.vectors * f.asDiagonal();
    Matrix points;
    if (options.fast_path)
        points = scaled.transpose();
    else if (r == 0)
        points = Matrix::Zero(data.size(), data.size());
    else
        points = scaled * kept.vectors.transpose();

    const auto km_result = kmeans(points, options.k, options.restarts, options.seed);
    ClusteringResult out;
    out.labels = km_result.labels;
    out.accuracy = align_and_score(out.labels, data.labels);
    out.diagnostics["delta"] = delta;
    out.diagnostics["delta_source"] = static_cast<double>(source);
    out.diagnostics["t"] = t;
    out.diagnostics["threshold"] = kept.threshold;
    out.diagnostics["surviving"] = static_cast<double>(r);
    out.diagnostics["phi_norm"] = lambda_max;
    out.diagnostics["kmeans_cost"] = km_result.cost;
    return out;
}

Vector second_singular_vector(const SymMatrix& phi)
{
    if (phi.dim() < 2)
        throw ValidationError("second_singular_vector: matrix must be at least 2 x 2");
    Vector v = linalg::top_eigenpairs(phi, 2).eigenvectors.col(1);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (v[i] != 0.0) {
            if (v[i] < 0.0)
                v = -v;
            break;
        }
    }
    return v;
}

Vector second_singular_vector(const model::Dataset& data, double t)
{
    check_dataset(data, "second_singular_vector");
    const auto projected = model::project_to_sphere(data);
    const auto km = kernels::kernel_matrix(projected, kernels::KernelSpec::h_t(t, data.dim()));
    return second_singular_vector(km.matrix);
}

ClusteringResult radial_cluster(const model::Dataset& data, int k, std::uint64_t seed)
{
    check_dataset(data, "radial_cluster");
    if (k < 2)
        throw ValidationError("radial_cluster: k must be >= 2");
    const Matrix norms = data.points.colwise().norm();
    const auto km_result = kmeans(norms, k, 10, seed);
    ClusteringResult out;
    out.labels = km_result.labels;
    out.accuracy = align_and_score(out.labels, data.labels);
    out.diagnostics["kmeans_cost"] = km_result.cost;
    return out;
}

} // namespace rkm::cluster
