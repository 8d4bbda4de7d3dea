#include "detail.hpp"
#include "rkm/error.hpp"

#include <cmath>

namespace rkm::linalg {

SpectralDecomposition jacobi_eig(const SymMatrix& sym)
{
    Matrix a = sym.matrix();
    const Eigen::Index n = a.rows();
    Matrix v = Matrix::Identity(n, n);
    const double frob = a.norm();
    constexpr int kMaxSweeps = 100;

    for (int sweep = 0;; ++sweep) {
        double off = 0.0;
        for (Eigen::Index q = 0; q < n; ++q)
            for (Eigen::Index p = 0; p < q; ++p)
                off += a(p, q) * a(p, q);
        if (std::sqrt(2.0 * off) <= 1e-15 * frob || off == 0.0)
            break;
        if (sweep == kMaxSweeps)
            throw ConvergenceError("jacobi_eig: no convergence after 100 sweeps", a.diagonal(), std::sqrt(off));

        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0)
                    continue;
                // Rotation that zeroes a(p,q); t is the smaller root of t^2 + 2 theta t - 1.
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    return detail::sort_descending(a.diagonal(), v);
}

} // namespace rkm::linalg
