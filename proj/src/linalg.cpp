#include "mimo/linalg.hpp"

#include <cmath>
#include <sstream>

namespace mimo {

double real_checked(cd z, const char* what)
{
    if (!(std::abs(z.imag()) <= 1e-10 * (1.0 + std::abs(z.real())))) {
        std::ostringstream os;
        os << what << " has imaginary part " << z.imag() << " (real " << z.real() << ")";
        throw InternalError(os.str());
    }
    return z.real();
}

CMat hermitian_solve(const CMat& A, const CMat& B)
{
    Eigen::LLT<CMat> llt(A);
    if (llt.info() != Eigen::Success) throw InternalError("matrix is not Hermitian positive definite");
    return llt.solve(B);
}

RVec dense_solve(const RMat& A, const RVec& b)
{
    return Eigen::PartialPivLU<RMat>(A).solve(b);
}

CMat block_diag(const std::vector<CMat>& blocks)
{
    Eigen::Index rows = 0, cols = 0;
    for (const auto& b : blocks) {
        rows += b.rows();
        cols += b.cols();
    }
    CMat out = CMat::Zero(rows, cols);
    Eigen::Index r = 0, c = 0;
    for (const auto& b : blocks) {
        out.block(r, c, b.rows(), b.cols()) = b;
        r += b.rows();
        c += b.cols();
    }
    return out;
}

double one_norm(const RMat& A)
{
    return A.cwiseAbs().colwise().sum().maxCoeff();
}

}  // namespace mimo
