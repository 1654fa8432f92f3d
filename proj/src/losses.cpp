#include "tdsc/losses.hpp"

#include <cmath>
#include <string>

#include "tdsc/errors.hpp"
#include "tdsc/numerics.hpp"

namespace tdsc {

namespace {

void check_square_n(const Matrix& m, Index n, const char* name) {
    if (m.rows() != n || m.cols() != n) {
        throw DimensionMismatch(std::string(name) + " must be " + std::to_string(n) + "x" +
                                std::to_string(n) + ", got " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()));
    }
}

void check_weights(const LossWeights& w) {
    if (w.lambda1 < 0.0 || w.lambda2 < 0.0 || w.eps <= 0.0) {
        throw InvalidConfig("loss weights need lambda1, lambda2 >= 0 and eps > 0");
    }
}

}  // namespace

double loss_se_residual(const Matrix& z, const Matrix& c_bar) {
    check_square_n(c_bar, z.cols(), "coefficient matrix");
    return (z - z * c_bar).squaredNorm();
}

double loss_temporal(const Matrix& z, const Matrix& lap) {
    check_square_n(lap, z.cols(), "laplacian");
    return (z * lap).cwiseProduct(z).sum();
}

LossBreakdown total_loss(const Matrix& z, const Matrix& c_bar, const Matrix& lap,
                         const LossWeights& weights) {
    check_weights(weights);
    LossBreakdown out;
    out.rho = coding_rate(z, CodingRateParams{weights.eps, z.rows(), z.cols()});
    out.se_residual = loss_se_residual(z, c_bar);
    out.temporal = loss_temporal(z, lap);
    out.total = -out.rho + weights.lambda1 * out.se_residual + weights.lambda2 * out.temporal;
    return out;
}

LossGrads total_loss_grads(const Matrix& z, const Matrix& c_bar, const Matrix& lap,
                           const LossWeights& weights) {
    check_weights(weights);
    check_square_n(c_bar, z.cols(), "coefficient matrix");
    check_square_n(lap, z.cols(), "laplacian");
    const Index n = z.cols();
    const Matrix residual = z - z * c_bar;
    const Matrix i_minus_c = Matrix::Identity(n, n) - c_bar;

    LossGrads g;
    g.dz = -coding_rate_grad(z, CodingRateParams{weights.eps, z.rows(), n}) +
           2.0 * weights.lambda1 * residual * i_minus_c.transpose() +
           2.0 * weights.lambda2 * z * lap;
    g.dc_bar = -2.0 * weights.lambda1 * z.transpose() * residual;
    return g;
}

double rho_relaxed(const Matrix& z, const Matrix& gamma, double eps) {
    const Index n = z.cols();
    const Index d = z.rows();
    check_square_n(gamma, n, "membership matrix");
    if (eps <= 0.0) throw InvalidConfig("eps must be positive");
    if ((gamma.array() < 0.0).any()) {
        throw InvalidConfig("membership matrix must be nonnegative");
    }
    const double scale = static_cast<double>(d) / (eps * eps);
    double sum = 0.0;
    for (Index j = 0; j < n; ++j) {
        const Matrix weighted = z * gamma.col(j).asDiagonal() * z.transpose();
        sum += logdet_psd(Matrix::Identity(d, d) + scale * weighted);
    }
    return sum / static_cast<double>(n);
}

double commutator_diagnostic(const Matrix& z, const Matrix& c_bar, const Matrix& lap,
                             const LossWeights& weights) {
    if (weights.lambda1 <= 0.0) {
        throw InvalidConfig("commutator diagnostic needs lambda1 > 0");
    }
    const Index n = z.cols();
    check_square_n(c_bar, n, "coefficient matrix");
    check_square_n(lap, n, "laplacian");
    const Matrix gram = z.transpose() * z;
    const Matrix i_minus_c = Matrix::Identity(n, n) - c_bar;
    const Matrix m =
        i_minus_c * i_minus_c.transpose() + (weights.lambda2 / weights.lambda1) * lap;
    const double gram_norm = gram.norm();
    const double m_norm = m.norm();
    if (gram_norm == 0.0 || m_norm == 0.0) {
        throw DivisionByZero("commutator diagnostic undefined for zero Gram or zero M");
    }
    return (gram * m - m * gram).norm() / (gram_norm * m_norm);
}

}  // namespace tdsc
