#pragma once

#include <functional>

#include "tdsc/types.hpp"

namespace tdsc {

// Parameters of the coding-rate function: error tolerance eps, representation
// dimension d and number of frames n. The derived scale is
// alpha = d / (n * eps^2).
struct CodingRateParams {
    double eps;
    Index d;
    Index n;

    double alpha() const { return static_cast<double>(d) / (static_cast<double>(n) * eps * eps); }
};

// log det(m + jitter*I) via Cholesky. Requires m square and symmetric
// (within 1e-10 relative tolerance); throws FactorizationFailed if the
// jittered matrix is not positive definite.
double logdet_psd(const Matrix& m, double jitter = 0.0);

// Total coding rate 0.5 * logdet(I + alpha * Z Z^T). The Gram matrix of the
// smaller dimension is used (Z Z^T when d <= N, Z^T Z otherwise); both sides
// agree by the commutation identity logdet(I + ZZ^T) = logdet(I + Z^T Z).
double coding_rate(const Matrix& z, const CodingRateParams& p);

// Analytic gradient alpha * Z * (I + alpha Z^T Z)^{-1}, evaluated through the
// smaller Gram side.
Matrix coding_rate_grad(const Matrix& z, const CodingRateParams& p);

// Central-difference gradient of a scalar function of a matrix:
// entry (i,j) = (f(x + h E_ij) - f(x - h E_ij)) / (2h).
// The default step h = 1e-5 is calibrated for inputs of unit Frobenius scale.
// Throws NonFiniteEvaluation if f is non-finite anywhere on the stencil.
Matrix finite_diff_grad(const std::function<double(const Matrix&)>& f,
                        const Matrix& x, double h = 1e-5);

}  // namespace tdsc
