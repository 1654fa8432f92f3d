#include "tdsc/numerics.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <string>

#include "tdsc/errors.hpp"

namespace tdsc {

namespace {

void check_symmetric(const Matrix& m) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    const double dev = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (dev > 1e-10 * scale) {
        throw AsymmetricInput("logdet_psd: input deviates from symmetry by " +
                              std::to_string(dev));
    }
}

void check_params(const Matrix& z, const CodingRateParams& p) {
    if (p.d != z.rows() || p.n != z.cols()) {
        throw DimensionMismatch("coding rate: params (d=" + std::to_string(p.d) +
                                ", n=" + std::to_string(p.n) + ") do not match Z of size " +
                                std::to_string(z.rows()) + "x" + std::to_string(z.cols()));
    }
}

}  // namespace

double logdet_psd(const Matrix& m, double jitter) {
    if (m.rows() != m.cols()) {
        throw DimensionMismatch("logdet_psd: matrix is " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()));
    }
    check_symmetric(m);
    Matrix a = m;
    if (jitter != 0.0) a.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) {
        throw FactorizationFailed("logdet_psd: Cholesky failed (matrix not positive definite"
                                  ", jitter=" + std::to_string(jitter) + ")");
    }
    // log det = 2 * sum log diag(L)
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

double coding_rate(const Matrix& z, const CodingRateParams& p) {
    check_params(z, p);
    const double alpha = p.alpha();
    const Index d = z.rows(), n = z.cols();
    Matrix gram;
    if (d <= n) {
        gram = Matrix::Identity(d, d) + alpha * (z * z.transpose());
    } else {
        gram = Matrix::Identity(n, n) + alpha * (z.transpose() * z);
    }
    return 0.5 * logdet_psd(gram);
}

Matrix coding_rate_grad(const Matrix& z, const CodingRateParams& p) {
    check_params(z, p);
    const double alpha = p.alpha();
    const Index d = z.rows(), n = z.cols();
    if (d <= n) {
        // alpha * (I + alpha Z Z^T)^{-1} Z
        Matrix gram = Matrix::Identity(d, d) + alpha * (z * z.transpose());
        Eigen::LLT<Matrix> llt(gram);
        if (llt.info() != Eigen::Success) {
            throw FactorizationFailed("coding_rate_grad: Cholesky failed on d-side Gram");
        }
        return alpha * llt.solve(z);
    }
    // alpha * Z (I + alpha Z^T Z)^{-1}
    Matrix gram = Matrix::Identity(n, n) + alpha * (z.transpose() * z);
    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success) {
        throw FactorizationFailed("coding_rate_grad: Cholesky failed on n-side Gram");
    }
    return alpha * llt.solve(z.transpose()).transpose();
}

Matrix finite_diff_grad(const std::function<double(const Matrix&)>& f,
                        const Matrix& x, double h) {
    Matrix grad(x.rows(), x.cols());
    Matrix probe = x;
    for (Index j = 0; j < x.cols(); ++j) {
        for (Index i = 0; i < x.rows(); ++i) {
            const double orig = probe(i, j);
            probe(i, j) = orig + h;
            const double fp = f(probe);
            probe(i, j) = orig - h;
            const double fm = f(probe);
            probe(i, j) = orig;
            if (!std::isfinite(fp) || !std::isfinite(fm)) {
                throw NonFiniteEvaluation("finite_diff_grad: non-finite evaluation at entry (" +
                                          std::to_string(i) + "," + std::to_string(j) + ")");
            }
            grad(i, j) = (fp - fm) / (2.0 * h);
        }
    }
    return grad;
}

}  // namespace tdsc
