#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mimo {

using cd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

// Raised for malformed inputs (shape mismatch, nonpositive variance, ...).
class InvalidArgument : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Raised when a quantity that must be real or nonnegative is not; indicates a bug.
class InternalError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

inline void require(bool cond, const std::string& msg)
{
    if (!cond) throw InvalidArgument(msg);
}

}  // namespace mimo
