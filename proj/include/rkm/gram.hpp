#pragma once

#include <vector>

#include "rkm/kernels.hpp"
#include "rkm/linalg.hpp"
#include "rkm/model.hpp"

namespace rkm::gram {

using linalg::Matrix;
using linalg::SymMatrix;
using linalg::Vector;

enum class GramSource { closed_form, empirical, second_order };

/// k x k matrix of kernel inner products between mixture components.
struct ComponentGram {
    SymMatrix matrix;
    GramSource source;
};

/// E exp(-|u|^2 / (2 tau^2)) for u ~ N(mean, cov):
///   det(I + cov / tau^2)^(-1/2) * exp(-mean^T (cov + tau^2 I)^(-1) mean / 2).
/// Isotropic and diagonal covariances use the product form; full ones a
/// Cholesky solve.
double gaussian_expectation(const Vector& mean, const model::Covariance& cov, double tau);

/// Entry (i, j) is the Gaussian-kernel expectation of x_i - x_j, which is
/// Gaussian with mean mu_i - mu_j and covariance Sigma_i + Sigma_j.
ComponentGram closed_form_gram(const model::MixtureModel& model, double tau);

/// Entry (i, j) is the average unnormalized kernel value over block i x block j.
ComponentGram empirical_gram(const kernels::KernelMatrix& km);

/// Second-order expansion of the h_t Gram matrix:
///   G(i, j) = 1 - t^2 / (2n) * trace(S_i S_j),  S = Sigma + mu mu^T.
ComponentGram gram_ht_second_order(const model::MixtureModel& model, double t);

/// Scales entry (i, j) by sqrt(w_i w_j).
SymMatrix weighted_gram(const ComponentGram& g, const std::vector<double>& weights);

/// sqrt(n) * min over pairs u != v of |S_u / tr S_u - S_v / tr S_v|_F with S
/// the non-centered second moment of each component.
double delta_statistic(const model::MixtureModel& model);

/// The same statistic estimated from each labelled block: the cross terms
/// use the empirical second moments, the squared self terms an unbiased
/// pair average.
double delta_from_samples(const model::Dataset& data);

} // namespace rkm::gram
