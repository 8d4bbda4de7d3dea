#include "rkm/kernels.hpp"

#include "rkm/error.hpp"
#include "rkm/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rkm::kernels {
namespace {

void require(bool ok, const std::string& what)
{
    if (!ok)
        throw ValidationError(what);
}

bool on_sphere(const Vector& sq_norms, Eigen::Index n)
{
    const double target = static_cast<double>(n);
    for (Eigen::Index j = 0; j < sq_norms.size(); ++j)
        if (std::abs(sq_norms[j] - target) > 1e-9 * target)
            return false;
    return true;
}

} // namespace

KernelSpec KernelSpec::gaussian(double tau)
{
    require(std::isfinite(tau) && tau > 0.0, "gaussian kernel: tau must be positive and finite");
    return KernelSpec(KernelKind::gaussian, tau, 0);
}

KernelSpec KernelSpec::distance() { return KernelSpec(KernelKind::distance, 0.0, 0); }

KernelSpec KernelSpec::smoothed_distance(double r0)
{
    require(std::isfinite(r0) && r0 > 0.0, "smoothed distance kernel: r0 must be positive and finite");
    return KernelSpec(KernelKind::smoothed_distance, r0, 0);
}

KernelSpec KernelSpec::h_t(double t, Eigen::Index n)
{
    require(std::isfinite(t) && t > 0.0, "h_t kernel: t must be positive and finite");
    require(n >= 1, "h_t kernel: dimension must be >= 1");
    return KernelSpec(KernelKind::h_t, t, n);
}

KernelSpec smoothed_distance_kernel(double r0) { return KernelSpec::smoothed_distance(r0); }

// Smoothed distance transition: with u = (r - r0) / r0 in [0, 1],
//   h = r0 + r0 p(u),  p(u) = u - u^3 + u^4 / 2,
// which matches value, slope 1 and curvature 0 at u = 0, and slope 0,
// curvature 0 at u = 1 where h reaches 3 r0 / 2.
double KernelSpec::h(double r) const
{
    switch (kind_) {
    case KernelKind::gaussian:
        return std::exp(-r * r / (2.0 * parameter_ * parameter_));
    case KernelKind::distance:
        return r;
    case KernelKind::smoothed_distance: {
        const double r0 = parameter_;
        if (r <= r0)
            return r;
        if (r >= 2.0 * r0)
            return 1.5 * r0;
        const double u = (r - r0) / r0;
        return r0 + r0 * (u - u * u * u + 0.5 * u * u * u * u);
    }
    case KernelKind::h_t: {
        const double n = static_cast<double>(dim_);
        return std::cos(parameter_ * (n - 0.5 * r * r) / std::sqrt(n));
    }
    }
    return 0.0;
}

double KernelSpec::dh(double r) const
{
    switch (kind_) {
    case KernelKind::gaussian:
        return -r / (parameter_ * parameter_) * h(r);
    case KernelKind::distance:
        return 1.0;
    case KernelKind::smoothed_distance: {
        const double r0 = parameter_;
        if (r <= r0)
            return 1.0;
        if (r >= 2.0 * r0)
            return 0.0;
        const double u = (r - r0) / r0;
        return 1.0 - 3.0 * u * u + 2.0 * u * u * u;
    }
    case KernelKind::h_t: {
        const double n = static_cast<double>(dim_);
        const double a = parameter_ * (n - 0.5 * r * r) / std::sqrt(n);
        return std::sin(a) * parameter_ * r / std::sqrt(n);
    }
    }
    return 0.0;
}

double KernelSpec::d2h(double r) const
{
    switch (kind_) {
    case KernelKind::gaussian: {
        const double t2 = parameter_ * parameter_;
        return (r * r / (t2 * t2) - 1.0 / t2) * h(r);
    }
    case KernelKind::distance:
        return 0.0;
    case KernelKind::smoothed_distance: {
        const double r0 = parameter_;
        if (r <= r0 || r >= 2.0 * r0)
            return 0.0;
        const double u = (r - r0) / r0;
        return (-6.0 * u + 6.0 * u * u) / r0;
    }
    case KernelKind::h_t: {
        const double n = static_cast<double>(dim_);
        const double t = parameter_;
        const double a = t * (n - 0.5 * r * r) / std::sqrt(n);
        return -std::cos(a) * t * t * r * r / n + std::sin(a) * t / std::sqrt(n);
    }
    }
    return 0.0;
}

std::string KernelSpec::describe() const
{
    std::ostringstream out;
    out.precision(17);
    switch (kind_) {
    case KernelKind::gaussian:
        out << "gaussian(tau=" << parameter_ << ")";
        break;
    case KernelKind::distance:
        out << "distance";
        break;
    case KernelKind::smoothed_distance:
        out << "smoothed_distance(r0=" << parameter_ << ")";
        break;
    case KernelKind::h_t:
        out << "h_t(t=" << parameter_ << ", n=" << dim_ << ")";
        break;
    }
    return out.str();
}

KernelMatrix kernel_matrix(const model::Dataset& data, const KernelSpec& spec)
{
    const Eigen::Index n = data.dim();
    const Eigen::Index count = data.size();
    require(count >= 1, "kernel_matrix: dataset is empty");
    require(static_cast<Eigen::Index>(data.labels.size()) == count, "kernel_matrix: label count does not match points");
    if (spec.kind() == KernelKind::h_t && spec.dimension() != n) {
        std::ostringstream msg;
        msg << "kernel_matrix: h_t kernel built for n=" << spec.dimension() << " but data has n=" << n;
        throw ValidationError(msg.str());
    }
    if (!data.points.allFinite())
        throw ValidationError("kernel_matrix: non-finite coordinate");

    const Matrix& x = data.points;
    const Vector sq = x.colwise().squaredNorm().transpose();
    const bool inner_product_form = spec.kind() == KernelKind::h_t && on_sphere(sq, n);
    const double scale = 1.0 / static_cast<double>(count);
    const double diag_value = spec.h(0.0) * scale;
    const double t_over_root_n = spec.kind() == KernelKind::h_t ? spec.parameter() / std::sqrt(static_cast<double>(n)) : 0.0;

    // Upper triangle of X^T X, then rewritten in place into kernel values.
    // Each (i, j) with i < j reads only the upper entry and writes both.
    Matrix k = Matrix::Zero(count, count);
    k.selfadjointView<Eigen::Upper>().rankUpdate(x.transpose());

    parallel_for(0, static_cast<std::size_t>(count), [&](std::size_t row) {
        const auto i = static_cast<Eigen::Index>(row);
        for (Eigen::Index j = i + 1; j < count; ++j) {
            const double g = k(i, j);
            double value;
            if (inner_product_form) {
                value = std::cos(t_over_root_n * g);
            } else {
                double r2 = sq[i] + sq[j] - 2.0 * g;
                // Cancellation leaves few correct digits when the points nearly
                // coincide; recompute those directly.
                if (r2 < 1e-4 * (sq[i] + sq[j]))
                    r2 = (x.col(i) - x.col(j)).squaredNorm();
                value = spec.h(std::sqrt(std::max(r2, 0.0)));
            }
            value *= scale;
            k(i, j) = value;
            k(j, i) = value;
        }
        k(i, i) = diag_value;
    });

    KernelMatrix out;
    out.matrix = SymMatrix::assume_symmetric(std::move(k));
    if (std::is_sorted(data.labels.begin(), data.labels.end()))
        out.block_bounds = data.blocks();
    return out;
}

KernelMatrix with_blocks(SymMatrix m, std::vector<std::pair<Eigen::Index, Eigen::Index>> blocks)
{
    Eigen::Index cursor = 0;
    for (const auto& b : blocks) {
        if (b.first != cursor || b.second < b.first)
            throw ValidationError("with_blocks: blocks must partition [0, N) in order");
        cursor = b.second;
    }
    if (cursor != m.dim())
        throw ValidationError("with_blocks: blocks must cover every row");
    KernelMatrix out;
    out.matrix = std::move(m);
    out.block_bounds = std::move(blocks);
    return out;
}

double h_t_eval(const Vector& x, const Vector& y, double t)
{
    require(x.size() == y.size() && x.size() > 0, "h_t_eval: vectors must have the same nonzero length");
    require(std::isfinite(t), "h_t_eval: t must be finite");
    const double root_n = std::sqrt(static_cast<double>(x.size()));
    const double tol = 1e-6 * std::max(1.0, root_n);
    if (std::abs(x.norm() - root_n) > tol || std::abs(y.norm() - root_n) > tol) {
        std::ostringstream msg;
        msg << "h_t_eval: inputs must lie on the sphere of radius " << root_n << " (norms " << x.norm() << ", "
            << y.norm() << ")";
        throw ValidationError(msg.str());
    }
    return std::cos(t * x.dot(y) / root_n);
}

double c_h_diagnostic(const KernelSpec& spec, double R, bool spherical, Eigen::Index n)
{
    require(std::isfinite(R) && R > 0.0, "c_h_diagnostic: R must be positive");
    require(n >= 1, "c_h_diagnostic: n must be >= 1");
    const double hi = 4.0 * std::sqrt(static_cast<double>(n));
    const double lo = spherical ? R / std::max(1.0, std::log(R)) : R / 2.0;
    if (!(lo < hi)) {
        std::ostringstream msg;
        msg << "c_h_diagnostic: empty grid [" << lo << ", " << hi << "]";
        throw ValidationError(msg.str());
    }

    constexpr int kGrid = 10000;
    const double log_lo = std::log(lo);
    const double step = (std::log(hi) - log_lo) / (kGrid - 1);
    double smooth = 0.0;
    double slope = 0.0;
    for (int g = 0; g < kGrid; ++g) {
        const double r = g == kGrid - 1 ? hi : std::exp(log_lo + step * g);
        const double d1 = spec.dh(r);
        const double d2 = spec.d2h(r);
        if (!std::isfinite(d1) || !std::isfinite(d2))
            throw ValidationError("c_h_diagnostic: derivative undefined at r=" + std::to_string(r));
        smooth = std::max(smooth, std::abs(d2) + std::abs(d1) / r);
        slope = std::max(slope, std::abs(d1));
    }
    return smooth + slope * std::exp(-R);
}

} // namespace rkm::kernels
