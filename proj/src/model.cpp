#include "rkm/model.hpp"

#include "rkm/error.hpp"
#include "rkm/parallel.hpp"
#include "rkm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace rkm::model {
namespace {

constexpr std::uint64_t kCountStream = 0;

std::uint64_t component_stream(std::size_t i) { return 1 + static_cast<std::uint64_t>(i); }

void check_covariance(const Covariance& cov, Eigen::Index dim, std::size_t index)
{
    std::ostringstream where;
    where << "component " << index << ": ";
    if (const auto* iso = std::get_if<Isotropic>(&cov)) {
        if (!std::isfinite(iso->variance) || iso->variance < 0.0)
            throw ValidationError(where.str() + "isotropic variance must be finite and >= 0");
    } else if (const auto* diag = std::get_if<Diagonal>(&cov)) {
        if (diag->variances.size() != dim)
            throw ValidationError(where.str() + "diagonal covariance has wrong length");
        for (Eigen::Index i = 0; i < dim; ++i)
            if (!std::isfinite(diag->variances[i]) || diag->variances[i] < 0.0)
                throw ValidationError(where.str() + "diagonal variances must be finite and >= 0");
    } else {
        const Matrix& m = std::get<Full>(cov).matrix;
        if (m.rows() != dim || m.cols() != dim)
            throw ValidationError(where.str() + "full covariance has wrong shape");
        const linalg::SymMatrix sym(m);
        const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
        if (dim > 0 && linalg::sym_eigenvalues(sym).minCoeff() < -1e-10 * scale)
            throw ValidationError(where.str() + "full covariance is not positive semidefinite");
    }
}

// Applies a square root of the covariance to a block of standard normal
// columns in place.
class CovarianceRoot {
public:
    CovarianceRoot(const Covariance& cov, Eigen::Index dim)
    {
        if (const auto* iso = std::get_if<Isotropic>(&cov)) {
            diag_ = Vector::Constant(dim, std::sqrt(iso->variance));
        } else if (const auto* d = std::get_if<Diagonal>(&cov)) {
            diag_ = d->variances.cwiseSqrt();
        } else {
            const auto eig = linalg::sym_eig(linalg::SymMatrix::assume_symmetric(std::get<Full>(cov).matrix));
            const Vector root = eig.eigenvalues.cwiseMax(0.0).cwiseSqrt();
            full_ = eig.eigenvectors * root.asDiagonal() * eig.eigenvectors.transpose();
            is_full_ = true;
        }
    }

    void apply(Matrix& z) const
    {
        if (is_full_)
            z = full_ * z;
        else
            z = diag_.asDiagonal() * z;
    }

private:
    Vector diag_;
    Matrix full_;
    bool is_full_ = false;
};

std::vector<std::size_t> multinomial_counts(const MixtureModel& model, std::size_t total, std::uint64_t seed)
{
    CounterRng rng(seed, kCountStream);
    std::vector<double> cumulative;
    double acc = 0.0;
    for (const auto& c : model.components()) {
        acc += c.weight;
        cumulative.push_back(acc);
    }
    std::vector<std::size_t> counts(model.size(), 0);
    for (std::size_t j = 0; j < total; ++j) {
        const double u = rng.uniform() * acc;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        auto idx = static_cast<std::size_t>(it - cumulative.begin());
        idx = std::min(idx, model.size() - 1);
        // Never land on a zero-weight component through rounding at the edge.
        while (model[idx].weight == 0.0 && idx > 0)
            --idx;
        ++counts[idx];
    }
    return counts;
}

std::vector<std::size_t> poisson_counts(const MixtureModel& model, double mean, std::uint64_t seed)
{
    CounterRng rng(seed, kCountStream);
    std::vector<std::size_t> counts(model.size(), 0);
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::size_t total = 0;
        for (std::size_t i = 0; i < model.size(); ++i) {
            const double rate = model[i].weight * mean;
            counts[i] = 0;
            if (rate > 0.0) {
                std::poisson_distribution<std::size_t> draw(rate);
                counts[i] = draw(rng);
            }
            total += counts[i];
        }
        if (total > 0)
            return counts;
    }
    throw ValidationError("sample: Poisson draw produced 0 points twice");
}

} // namespace

Matrix covariance_matrix(const Covariance& cov, Eigen::Index dim)
{
    if (const auto* iso = std::get_if<Isotropic>(&cov))
        return iso->variance * Matrix::Identity(dim, dim);
    if (const auto* d = std::get_if<Diagonal>(&cov))
        return d->variances.asDiagonal();
    return std::get<Full>(cov).matrix;
}

double covariance_trace(const Covariance& cov, Eigen::Index dim)
{
    if (const auto* iso = std::get_if<Isotropic>(&cov))
        return iso->variance * static_cast<double>(dim);
    if (const auto* d = std::get_if<Diagonal>(&cov))
        return d->variances.sum();
    return std::get<Full>(cov).matrix.trace();
}

Covariance covariance_sum(const Covariance& a, const Covariance& b, Eigen::Index dim)
{
    const auto* ia = std::get_if<Isotropic>(&a);
    const auto* ib = std::get_if<Isotropic>(&b);
    if (ia && ib)
        return Isotropic{ia->variance + ib->variance};
    const bool a_diag = !std::holds_alternative<Full>(a);
    const bool b_diag = !std::holds_alternative<Full>(b);
    if (a_diag && b_diag)
        return Diagonal{Vector(covariance_matrix(a, dim).diagonal() + covariance_matrix(b, dim).diagonal())};
    return Full{covariance_matrix(a, dim) + covariance_matrix(b, dim)};
}

Matrix GaussianComponent::second_moment() const
{
    const Eigen::Index n = mean.size();
    return covariance_matrix(covariance, n) + mean * mean.transpose();
}

MixtureModel::MixtureModel(Eigen::Index dim, std::vector<GaussianComponent> components)
    : dim_(dim), components_(std::move(components))
{
    if (dim_ < 1)
        throw ValidationError("MixtureModel: dimension must be >= 1");
    if (components_.empty())
        throw ValidationError("MixtureModel: needs at least one component");
    double total = 0.0;
    for (std::size_t i = 0; i < components_.size(); ++i) {
        const auto& c = components_[i];
        if (!std::isfinite(c.weight) || c.weight < 0.0 || c.weight > 1.0) {
            std::ostringstream msg;
            msg << "MixtureModel: component " << i << " weight " << c.weight << " outside [0, 1]";
            throw ValidationError(msg.str());
        }
        if (c.mean.size() != dim_) {
            std::ostringstream msg;
            msg << "MixtureModel: component " << i << " mean has length " << c.mean.size() << ", expected " << dim_;
            throw ValidationError(msg.str());
        }
        if (!c.mean.allFinite())
            throw ValidationError("MixtureModel: non-finite mean entry");
        check_covariance(c.covariance, dim_, i);
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "MixtureModel: weights sum to " << total << ", expected 1";
        throw ValidationError(msg.str());
    }
}

double MixtureModel::radius() const
{
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : components_)
        best = std::min(best, std::sqrt(covariance_trace(c.covariance, dim_)));
    return best;
}

int Dataset::label_count() const
{
    int k = 0;
    for (int l : labels) {
        if (l < 0)
            throw ValidationError("Dataset: negative label");
        k = std::max(k, l + 1);
    }
    return k;
}

std::vector<std::pair<Eigen::Index, Eigen::Index>> Dataset::blocks() const
{
    const int k = label_count();
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t j = 0; j < labels.size(); ++j) {
        if (j > 0 && labels[j] < labels[j - 1])
            throw ValidationError("Dataset: labels must be nondecreasing along columns");
        ++counts[static_cast<std::size_t>(labels[j])];
    }
    std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
    Eigen::Index cursor = 0;
    for (Eigen::Index c : counts) {
        out.emplace_back(cursor, cursor + c);
        cursor += c;
    }
    return out;
}

Dataset sample(const MixtureModel& model, const SizeMode& mode, std::uint64_t seed)
{
    std::vector<std::size_t> counts;
    if (const auto* fixed = std::get_if<FixedTotal>(&mode)) {
        if (fixed->total < 1)
            throw ValidationError("sample: total size must be >= 1");
        counts = multinomial_counts(model, fixed->total, seed);
    } else if (const auto* per = std::get_if<FixedPerComponent>(&mode)) {
        if (per->counts.size() != model.size())
            throw ValidationError("sample: one count per component required");
        counts = per->counts;
        for (std::size_t i = 0; i < counts.size(); ++i)
            if (counts[i] > 0 && model[i].weight == 0.0)
                throw ValidationError("sample: positive count for a zero-weight component");
    } else {
        const double mean = std::get<PoissonTotal>(mode).mean;
        if (!(mean >= 1.0) || !std::isfinite(mean))
            throw ValidationError("sample: Poisson mean must be >= 1");
        counts = poisson_counts(model, mean, seed);
    }

    std::vector<Eigen::Index> offsets(counts.size() + 1, 0);
    for (std::size_t i = 0; i < counts.size(); ++i)
        offsets[i + 1] = offsets[i] + static_cast<Eigen::Index>(counts[i]);
    const Eigen::Index total = offsets.back();
    if (total < 1)
        throw ValidationError("sample: total size must be >= 1");

    const Eigen::Index n = model.dim();
    Dataset out;
    out.seed = seed;
    out.points.resize(n, total);
    out.labels.resize(static_cast<std::size_t>(total));

    parallel_for(0, model.size(), [&](std::size_t i) {
        const Eigen::Index c = static_cast<Eigen::Index>(counts[i]);
        if (c == 0)
            return;
        CounterRng rng(seed, component_stream(i));
        Matrix z(n, c);
        for (Eigen::Index j = 0; j < c; ++j)
            for (Eigen::Index r = 0; r < n; ++r)
                z(r, j) = rng.normal();
        CovarianceRoot(model[i].covariance, n).apply(z);
        z.colwise() += model[i].mean;
        out.points.middleCols(offsets[i], c) = z;
        std::fill(out.labels.begin() + offsets[i], out.labels.begin() + offsets[i + 1], static_cast<int>(i));
    });
    return out;
}

Dataset project_to_sphere(const Dataset& data)
{
    Dataset out = data;
    const double radius = std::sqrt(static_cast<double>(data.dim()));
    for (Eigen::Index j = 0; j < data.size(); ++j) {
        const double norm = data.points.col(j).norm();
        if (norm == 0.0 || !std::isfinite(norm)) {
            std::ostringstream msg;
            msg << "project_to_sphere: column " << j << " has norm " << norm;
            throw ValidationError(msg.str());
        }
        out.points.col(j) *= radius / norm;
    }
    return out;
}

MixtureModel figure1_model(Eigen::Index n, double s)
{
    if (n < 2 || n % 2 != 0) {
        std::ostringstream msg;
        msg << "figure1_model: n must be even and >= 2, got " << n;
        throw ValidationError(msg.str());
    }
    if (!(s >= 0.0 && s < 1.0)) {
        std::ostringstream msg;
        msg << "figure1_model: s must lie in [0, 1), got " << s;
        throw ValidationError(msg.str());
    }
    const Eigen::Index half = n / 2;
    Vector first(n), second(n);
    first.head(half).setConstant(1.0 + s);
    first.tail(n - half).setConstant(1.0 - s);
    second.head(half).setConstant(1.0 - s);
    second.tail(n - half).setConstant(1.0 + s);
    return MixtureModel(n, {GaussianComponent{0.5, Vector::Zero(n), Diagonal{first}},
                            GaussianComponent{0.5, Vector::Zero(n), Diagonal{second}}});
}

MixtureModel two_gaussians(Eigen::Index n, double separation)
{
    if (n < 1)
        throw ValidationError("two_gaussians: n must be >= 1");
    Vector mu = Vector::Zero(n);
    mu[0] = 0.5 * separation;
    return MixtureModel(n, {GaussianComponent{0.5, mu, Isotropic{1.0}}, GaussianComponent{0.5, -mu, Isotropic{1.0}}});
}

MixtureModel isotropic_scales(Eigen::Index n, const std::vector<double>& variances)
{
    if (variances.empty())
        throw ValidationError("isotropic_scales: need at least one variance");
    std::vector<GaussianComponent> comps;
    const double w = 1.0 / static_cast<double>(variances.size());
    for (double v : variances)
        comps.push_back(GaussianComponent{w, Vector::Zero(n), Isotropic{v}});
    // Equal weights 1/k can miss the 1e-12 sum check for awkward k; renormalize the last.
    double rest = 0.0;
    for (std::size_t i = 0; i + 1 < comps.size(); ++i)
        rest += comps[i].weight;
    comps.back().weight = 1.0 - rest;
    return MixtureModel(n, std::move(comps));
}

} // namespace rkm::model
