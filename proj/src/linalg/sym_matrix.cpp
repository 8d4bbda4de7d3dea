#include "rkm/error.hpp"
#include "rkm/linalg.hpp"

#include <cmath>
#include <sstream>

namespace rkm::linalg {

SymMatrix::SymMatrix(Matrix m) : m_(std::move(m))
{
    if (m_.rows() != m_.cols())
        throw ValidationError("SymMatrix: matrix is not square");
    if (!m_.allFinite())
        throw ValidationError("SymMatrix: non-finite entry");
    const double scale = m_.cwiseAbs().maxCoeff();
    const double tol = 1e-12 * (scale > 0.0 ? scale : 1.0);
    for (Eigen::Index j = 0; j < m_.cols(); ++j) {
        for (Eigen::Index i = j + 1; i < m_.rows(); ++i) {
            if (std::abs(m_(i, j) - m_(j, i)) > tol) {
                std::ostringstream msg;
                msg << "SymMatrix: entries (" << i << "," << j << ") and (" << j << "," << i
                    << ") differ by " << std::abs(m_(i, j) - m_(j, i));
                throw ValidationError(msg.str());
            }
        }
    }
}

SymMatrix SymMatrix::assume_symmetric(Matrix m)
{
    SymMatrix out;
    out.m_ = std::move(m);
    return out;
}

} // namespace rkm::linalg
