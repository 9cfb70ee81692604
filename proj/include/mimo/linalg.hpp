#pragma once

#include "mimo/types.hpp"

namespace mimo {

// Drops the imaginary part after checking it is numerical dust.
double real_checked(cd z, const char* what = "scalar");

// Solves A X = B for Hermitian positive-definite A.
CMat hermitian_solve(const CMat& A, const CMat& B);

// Solves A x = b for a small dense real system (partial pivoting).
RVec dense_solve(const RMat& A, const RVec& b);

// Block-diagonal concatenation.
CMat block_diag(const std::vector<CMat>& blocks);

// Matrix one-norm (max absolute column sum).
double one_norm(const RMat& A);

}  // namespace mimo
