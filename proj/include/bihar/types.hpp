#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace bihar {

using cplx = std::complex<double>;
using VecR = Eigen::VectorXd;
using VecC = Eigen::VectorXcd;
using MatR = Eigen::MatrixXd;
using MatC = Eigen::MatrixXcd;

inline constexpr cplx I{0.0, 1.0};
inline constexpr double PI = 3.14159265358979323846;

// Bad parameters supplied by the caller (maps to CLI exit code 2).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Mathematical domain violated (lambda <= 0, s <= 1, ...).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// A linear system that should be solvable turned out numerically singular.
struct SingularError : std::runtime_error {
    double lambda;
    SingularError(const std::string& what, double lam) : std::runtime_error(what), lambda(lam) {}
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace bihar
