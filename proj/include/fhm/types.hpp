#pragma once

#include <complex>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fhm {

using cplx = std::complex<double>;

/// Largest fiber dimension supported by the stack-allocated node matrices.
inline constexpr int kMaxDim = 16;

/// Per-node work matrix. Fixed capacity, so kernels never touch the heap.
using Mat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;
using RVec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

using MatMap = Eigen::Map<Eigen::MatrixXcd>;
using ConstMatMap = Eigen::Map<const Eigen::MatrixXcd>;

/// Short decimal text of a real for diagnostics.
inline std::string to_text(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

// Error taxonomy. Each category maps onto one CLI exit code.

/// Malformed or out-of-contract input (exit code 2).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An iterative process failed to reach its tolerance (exit code 3).
class NonConvergenceError : public std::runtime_error {
public:
    NonConvergenceError(const std::string& what, std::vector<double> history = {})
        : std::runtime_error(what), history_(std::move(history)) {}
    const std::vector<double>& history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

/// A numerical certificate or structural check failed (exit code 4).
class VerificationError : public std::runtime_error {
public:
    VerificationError(const std::string& what, double defect)
        : std::runtime_error(what), defect_(defect) {}
    double defect() const noexcept { return defect_; }

private:
    double defect_;
};

/// Monodromy of the frame is not unitary within tolerance.
class MonodromyError : public VerificationError {
public:
    using VerificationError::VerificationError;
};

/// Monodromy has an eigenphase at the branch cut of the principal logarithm.
class BranchAmbiguityError : public VerificationError {
public:
    using VerificationError::VerificationError;
};

}  // namespace fhm
