#include "rkm/gram.hpp"

#include "rkm/error.hpp"
#include "rkm/parallel.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace rkm::gram {
namespace {

using model::Covariance;
using model::Diagonal;
using model::Full;
using model::Isotropic;

// Component with zero mean and a diagonal covariance: its second moment is
// the diagonal itself and traces of products reduce to dot products.
bool diagonal_second_moment(const model::GaussianComponent& c)
{
    return !std::holds_alternative<Full>(c.covariance) && c.mean.isZero(0.0);
}

Vector second_moment_diagonal(const model::GaussianComponent& c, Eigen::Index n)
{
    return model::covariance_matrix(c.covariance, n).diagonal();
}

SymMatrix symmetric_from_pairs(Eigen::Index k, const std::function<double(Eigen::Index, Eigen::Index)>& entry)
{
    Matrix g(k, k);
    std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = i; j < k; ++j)
            pairs.emplace_back(i, j);
    parallel_for(0, pairs.size(), [&](std::size_t p) {
        const auto [i, j] = pairs[p];
        const double v = entry(i, j);
        g(i, j) = v;
        g(j, i) = v;
    });
    return SymMatrix::assume_symmetric(std::move(g));
}

} // namespace

double gaussian_expectation(const Vector& mean, const Covariance& cov, double tau)
{
    if (!(tau > 0.0) || !std::isfinite(tau))
        throw ValidationError("gaussian_expectation: tau must be positive and finite");
    const Eigen::Index n = mean.size();
    if (n < 1)
        throw ValidationError("gaussian_expectation: empty mean vector");
    // Reuses the mixture validation for dimensions and positive semidefiniteness.
    const model::MixtureModel check(n, {model::GaussianComponent{1.0, mean, cov}});
    (void)check;

    const double tau2 = tau * tau;
    if (std::holds_alternative<Full>(cov)) {
        const Matrix shifted = std::get<Full>(cov).matrix + tau2 * Matrix::Identity(n, n);
        const Eigen::LLT<Matrix> llt(shifted);
        if (llt.info() != Eigen::Success)
            throw ValidationError("gaussian_expectation: covariance + tau^2 I is not positive definite");
        const Matrix& l = llt.matrixLLT();
        double log_det = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            log_det += 2.0 * std::log(l(i, i) / tau);
        const double quad = mean.dot(llt.solve(mean));
        return std::exp(-0.5 * log_det - 0.5 * quad);
    }

    const Vector var = model::covariance_matrix(cov, n).diagonal();
    double log_value = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        log_value -= 0.5 * std::log1p(var[i] / tau2);
        log_value -= 0.5 * mean[i] * mean[i] / (var[i] + tau2);
    }
    return std::exp(log_value);
}

ComponentGram closed_form_gram(const model::MixtureModel& model, double tau)
{
    const Eigen::Index n = model.dim();
    const auto k = static_cast<Eigen::Index>(model.size());
    auto entry = [&](Eigen::Index i, Eigen::Index j) {
        const auto& a = model[static_cast<std::size_t>(i)];
        const auto& b = model[static_cast<std::size_t>(j)];
        return gaussian_expectation(a.mean - b.mean, model::covariance_sum(a.covariance, b.covariance, n), tau);
    };
    return {symmetric_from_pairs(k, entry), GramSource::closed_form};
}

ComponentGram empirical_gram(const kernels::KernelMatrix& km)
{
    if (km.block_bounds.empty())
        throw ValidationError("empirical_gram: kernel matrix carries no block structure");
    for (const auto& b : km.block_bounds)
        if (b.second <= b.first)
            throw ValidationError("empirical_gram: empty block");
    const auto k = static_cast<Eigen::Index>(km.block_bounds.size());
    const Matrix& m = km.matrix.matrix();
    const double unscale = km.normalized ? static_cast<double>(km.size()) : 1.0;
    auto entry = [&](Eigen::Index i, Eigen::Index j) {
        const auto [r0, r1] = km.block_bounds[static_cast<std::size_t>(i)];
        const auto [c0, c1] = km.block_bounds[static_cast<std::size_t>(j)];
        return m.block(r0, c0, r1 - r0, c1 - c0).mean() * unscale;
    };
    return {symmetric_from_pairs(k, entry), GramSource::empirical};
}

ComponentGram gram_ht_second_order(const model::MixtureModel& model, double t)
{
    if (!(t >= 0.0) || !std::isfinite(t))
        throw ValidationError("gram_ht_second_order: t must be finite and >= 0");
    const Eigen::Index n = model.dim();
    const auto k = static_cast<Eigen::Index>(model.size());
    std::vector<Matrix> moments;
    std::vector<Vector> diagonals;
    bool all_diagonal = true;
    for (const auto& c : model.components())
        all_diagonal = all_diagonal && diagonal_second_moment(c);
    for (const auto& c : model.components()) {
        if (all_diagonal)
            diagonals.push_back(second_moment_diagonal(c, n));
        else
            moments.push_back(c.second_moment());
    }
    const double factor = t * t / (2.0 * static_cast<double>(n));
    auto entry = [&](Eigen::Index i, Eigen::Index j) {
        const auto a = static_cast<std::size_t>(i);
        const auto b = static_cast<std::size_t>(j);
        const double trace = all_diagonal ? diagonals[a].dot(diagonals[b]) : moments[a].cwiseProduct(moments[b]).sum();
        return 1.0 - factor * trace;
    };
    return {symmetric_from_pairs(k, entry), GramSource::second_order};
}

SymMatrix weighted_gram(const ComponentGram& g, const std::vector<double>& weights)
{
    const Eigen::Index k = g.matrix.dim();
    if (static_cast<Eigen::Index>(weights.size()) != k)
        throw ValidationError("weighted_gram: one weight per component required");
    Vector root(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        if (!(weights[static_cast<std::size_t>(i)] >= 0.0))
            throw ValidationError("weighted_gram: weights must be >= 0");
        root[i] = std::sqrt(weights[static_cast<std::size_t>(i)]);
    }
    return SymMatrix::assume_symmetric(root.asDiagonal() * g.matrix.matrix() * root.asDiagonal());
}

double delta_statistic(const model::MixtureModel& model)
{
    if (model.size() < 2)
        throw ValidationError("delta_statistic: needs at least two components");
    const Eigen::Index n = model.dim();
    bool all_diagonal = true;
    for (const auto& c : model.components())
        all_diagonal = all_diagonal && diagonal_second_moment(c);

    std::vector<Matrix> normalized;
    std::vector<Vector> normalized_diag;
    for (std::size_t i = 0; i < model.size(); ++i) {
        const auto& c = model[i];
        const double trace = model::covariance_trace(c.covariance, n) + c.mean.squaredNorm();
        if (!(trace > 0.0)) {
            std::ostringstream msg;
            msg << "delta_statistic: component " << i << " has zero second moment";
            throw ValidationError(msg.str());
        }
        if (all_diagonal)
            normalized_diag.push_back(second_moment_diagonal(c, n) / trace);
        else
            normalized.push_back(c.second_moment() / trace);
    }

    double best = std::numeric_limits<double>::infinity();
    for (std::size_t u = 0; u < model.size(); ++u)
        for (std::size_t v = u + 1; v < model.size(); ++v) {
            const double d = all_diagonal ? (normalized_diag[u] - normalized_diag[v]).norm()
                                          : (normalized[u] - normalized[v]).norm();
            best = std::min(best, d);
        }
    return std::sqrt(static_cast<double>(n)) * best;
}

double delta_from_samples(const model::Dataset& data)
{
    const auto blocks = data.blocks();
    std::vector<std::size_t> present;
    for (std::size_t l = 0; l < blocks.size(); ++l)
        if (blocks[l].second > blocks[l].first)
            present.push_back(l);
    if (present.size() < 2)
        throw ValidationError("delta_from_samples: needs at least two nonempty labels");

    // With X_l the block of label l and S_l = X_l X_l^T / N_l,
    // <S_u, S_v>_F = |X_u^T X_v|_F^2 / (N_u N_v) and tr S_l = |X_l|_F^2 / N_l,
    // so no n x n matrix is ever formed. The self term drops the a == b
    // pairs, which would otherwise add |x_a|^4 noise of order n^2 / N_l.
    std::vector<double> traces, self;
    for (std::size_t l : present) {
        const auto [b, e] = blocks[l];
        const auto x = data.points.middleCols(b, e - b);
        const double count = static_cast<double>(e - b);
        traces.push_back(x.squaredNorm() / count);
        const double all = (x.transpose() * x).squaredNorm();
        if (count < 2.0) {
            self.push_back(all);
            continue;
        }
        const double diag = x.colwise().squaredNorm().array().square().sum();
        self.push_back((all - diag) / (count * (count - 1.0)));
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < present.size(); ++a)
        for (std::size_t c = a + 1; c < present.size(); ++c) {
            const auto [b0, e0] = blocks[present[a]];
            const auto [b1, e1] = blocks[present[c]];
            const auto xa = data.points.middleCols(b0, e0 - b0);
            const auto xc = data.points.middleCols(b1, e1 - b1);
            const double cross = (xa.transpose() * xc).squaredNorm() / (static_cast<double>(e0 - b0) * static_cast<double>(e1 - b1));
            const double ta = traces[a], tc = traces[c];
            const double sq = self[a] / (ta * ta) + self[c] / (tc * tc) - 2.0 * cross / (ta * tc);
            best = std::min(best, std::sqrt(std::max(sq, 0.0)));
        }
    return std::sqrt(static_cast<double>(data.dim())) * best;
}

} // namespace rkm::gram
