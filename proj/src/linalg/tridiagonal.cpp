// Householder reduction to tridiagonal form followed by the implicit QL
// method, after the EISPACK tred2/tql2 pair. Works on the lower triangle.

#include "detail.hpp"
#include "rkm/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace rkm::linalg {
namespace {

// On exit `v` holds the orthogonal reduction Q (when want_vectors), `d` the
// diagonal and `e` the subdiagonal in e[1..n-1].
void householder_tridiagonalize(Matrix& v, Vector& d, Vector& e, bool want_vectors)
{
    const Eigen::Index n = v.rows();
    d.resize(n);
    e.resize(n);
    for (Eigen::Index j = 0; j < n; ++j)
        d[j] = v(n - 1, j);

    for (Eigen::Index i = n - 1; i > 0; --i) {
        double scale = 0.0;
        double h = 0.0;
        for (Eigen::Index k = 0; k < i; ++k)
            scale += std::abs(d[k]);
        if (scale == 0.0) {
            e[i] = d[i - 1];
            for (Eigen::Index j = 0; j < i; ++j) {
                d[j] = v(i - 1, j);
                v(i, j) = 0.0;
                v(j, i) = 0.0;
            }
        } else {
            for (Eigen::Index k = 0; k < i; ++k) {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            double f = d[i - 1];
            double g = std::sqrt(h);
            if (f > 0)
                g = -g;
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for (Eigen::Index j = 0; j < i; ++j)
                e[j] = 0.0;

            for (Eigen::Index j = 0; j < i; ++j) {
                f = d[j];
                v(j, i) = f;
                g = e[j] + v(j, j) * f;
                for (Eigen::Index k = j + 1; k <= i - 1; ++k) {
                    g += v(k, j) * d[k];
                    e[k] += v(k, j) * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for (Eigen::Index j = 0; j < i; ++j) {
                e[j] /= h;
                f += e[j] * d[j];
            }
            const double hh = f / (h + h);
            for (Eigen::Index j = 0; j < i; ++j)
                e[j] -= hh * d[j];
            for (Eigen::Index j = 0; j < i; ++j) {
                f = d[j];
                g = e[j];
                for (Eigen::Index k = j; k <= i - 1; ++k)
                    v(k, j) -= (f * e[k] + g * d[k]);
                d[j] = v(i - 1, j);
                v(i, j) = 0.0;
            }
        }
        d[i] = h;
    }

    if (!want_vectors) {
        for (Eigen::Index i = 0; i < n; ++i)
            d[i] = v(i, i);
        e[0] = 0.0;
        return;
    }

    for (Eigen::Index i = 0; i < n - 1; ++i) {
        v(n - 1, i) = v(i, i);
        v(i, i) = 1.0;
        const double h = d[i + 1];
        if (h != 0.0) {
            for (Eigen::Index k = 0; k <= i; ++k)
                d[k] = v(k, i + 1) / h;
            for (Eigen::Index j = 0; j <= i; ++j) {
                double g = 0.0;
                for (Eigen::Index k = 0; k <= i; ++k)
                    g += v(k, i + 1) * v(k, j);
                for (Eigen::Index k = 0; k <= i; ++k)
                    v(k, j) -= g * d[k];
            }
        }
        for (Eigen::Index k = 0; k <= i; ++k)
            v(k, i + 1) = 0.0;
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        d[j] = v(n - 1, j);
        v(n - 1, j) = 0.0;
    }
    v(n - 1, n - 1) = 1.0;
    e[0] = 0.0;
}

void implicit_ql(Matrix& v, Vector& d, Vector& e, bool want_vectors)
{
    const Eigen::Index n = d.size();
    if (n == 0)
        return;
    for (Eigen::Index i = 1; i < n; ++i)
        e[i - 1] = e[i];
    e[n - 1] = 0.0;

    constexpr double eps = 0x1.0p-52;
    constexpr int kMaxIterations = 60;
    double f = 0.0;
    double tst1 = 0.0;
    for (Eigen::Index l = 0; l < n; ++l) {
        tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
        Eigen::Index m = l;
        while (m < n - 1 && std::abs(e[m]) > eps * tst1)
            ++m;

        if (m > l) {
            int iter = 0;
            do {
                if (++iter > kMaxIterations)
                    throw ConvergenceError("tridiagonal_ql_eig: QL iteration did not converge", d, std::abs(e[l]));

                double g = d[l];
                double p = (d[l + 1] - g) / (2.0 * e[l]);
                double r = std::hypot(p, 1.0);
                if (p < 0)
                    r = -r;
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                const double dl1 = d[l + 1];
                double h = g - d[l];
                for (Eigen::Index i = l + 2; i < n; ++i)
                    d[i] -= h;
                f += h;

                p = d[m];
                double c = 1.0, c2 = 1.0, c3 = 1.0;
                const double el1 = e[l + 1];
                double s = 0.0, s2 = 0.0;
                for (Eigen::Index i = m - 1; i >= l; --i) {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = std::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if (want_vectors) {
                        auto vi = v.col(i);
                        auto vi1 = v.col(i + 1);
                        for (Eigen::Index k = 0; k < n; ++k) {
                            const double t = vi1[k];
                            vi1[k] = s * vi[k] + c * t;
                            vi[k] = c * vi[k] - s * t;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
            } while (std::abs(e[l]) > eps * tst1);
        }
        d[l] += f;
        e[l] = 0.0;
    }
}

} // namespace

SpectralDecomposition tridiagonal_ql_eig(const SymMatrix& m, bool want_vectors)
{
    if (m.dim() == 0)
        return {Vector(), Matrix()};
    Matrix v = m.matrix();
    Vector d, e;
    householder_tridiagonalize(v, d, e, want_vectors);
    implicit_ql(v, d, e, want_vectors);
    if (!want_vectors) {
        std::sort(d.begin(), d.end(), std::greater<>());
        return {d, Matrix()};
    }
    return detail::sort_descending(d, v);
}

Vector sym_eigenvalues(const SymMatrix& m)
{
    if (m.dim() <= detail::kJacobiLimit)
        return jacobi_eig(m).eigenvalues;
    return tridiagonal_ql_eig(m, false).eigenvalues;
}

} // namespace rkm::linalg
