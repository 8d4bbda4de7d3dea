#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rkm/linalg.hpp"
#include "rkm/model.hpp"

namespace rkm::kernels {

using linalg::Matrix;
using linalg::SymMatrix;
using linalg::Vector;

enum class KernelKind { gaussian, distance, smoothed_distance, h_t };

/// Radial profile h(r) with its first two derivatives.
///
/// - gaussian(tau):          exp(-r^2 / (2 tau^2))
/// - distance:               r
/// - smoothed_distance(r0):  r up to r0, a C2 quartic over [r0, 2 r0], then
///                           constant 3 r0 / 2
/// - h_t(t, n):              cos(t (n - r^2/2) / sqrt(n)), which on the sphere
///                           of radius sqrt(n) equals cos(t <x,y> / sqrt(n))
class KernelSpec {
public:
    static KernelSpec gaussian(double tau);
    static KernelSpec distance();
    static KernelSpec smoothed_distance(double r0);
    static KernelSpec h_t(double t, Eigen::Index n);

    KernelKind kind() const { return kind_; }
    /// tau, r0 or t depending on the kind; 0 for the plain distance.
    double parameter() const { return parameter_; }
    /// Dimension baked into h_t; 0 for the other kinds.
    Eigen::Index dimension() const { return dim_; }

    double h(double r) const;
    double dh(double r) const;
    double d2h(double r) const;

    /// Whether (x, y) -> h(|x - y|) is a positive-definite kernel.
    bool positive_definite() const { return kind_ == KernelKind::gaussian; }

    std::string describe() const;

private:
    KernelSpec(KernelKind kind, double parameter, Eigen::Index dim) : kind_(kind), parameter_(parameter), dim_(dim) {}

    KernelKind kind_;
    double parameter_;
    Eigen::Index dim_;
};

KernelSpec smoothed_distance_kernel(double r0);

/// Normalized kernel matrix h(|x_i - x_j|) / N.
struct KernelMatrix {
    SymMatrix matrix;
    /// [begin, end) per component; empty when the labels are not sorted.
    std::vector<std::pair<Eigen::Index, Eigen::Index>> block_bounds;
    bool normalized = true;

    Eigen::Index size() const { return matrix.dim(); }
};

/// Builds the matrix once per unordered pair and mirrors it, so the result is
/// exactly symmetric. Pairwise distances come from the Gram matrix X^T X,
/// with a direct recomputation for nearly coincident pairs. h_t on data that
/// lies on the sphere of radius sqrt(n) uses cos(t <x,y> / sqrt(n)) directly.
KernelMatrix kernel_matrix(const model::Dataset& data, const KernelSpec& spec);

/// Block bounds for an existing matrix, e.g. one assembled by hand in tests.
KernelMatrix with_blocks(SymMatrix m, std::vector<std::pair<Eigen::Index, Eigen::Index>> blocks);

/// cos(t <x,y> / sqrt(n)) for x, y on the sphere of radius sqrt(n).
double h_t_eval(const Vector& x, const Vector& y, double t);

/// Numeric kernel-smoothness constant
///   sup_{r in grid} (|h''(r)| + |h'(r)| / r) + sup_{r in grid} |h'(r)| exp(-R)
/// on a logarithmic grid of 10^4 points over [R/2, 4 sqrt(n)], or over
/// [R / max(1, log R), 4 sqrt(n)] when `spherical`. Constants hidden in the
/// asymptotic statement are set to 1.
double c_h_diagnostic(const KernelSpec& spec, double R, bool spherical, Eigen::Index n);

} // namespace rkm::kernels
