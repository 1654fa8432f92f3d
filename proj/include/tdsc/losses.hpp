#pragma once

#include "tdsc/types.hpp"

namespace tdsc {

struct LossWeights {
    double lambda1 = 0.2;
    double lambda2 = 20.0;
    double eps = 0.01;
};

// total = -rho + lambda1 * se_residual + lambda2 * temporal, exact to 1e-12.
struct LossBreakdown {
    double rho = 0.0;
    double se_residual = 0.0;
    double temporal = 0.0;
    double total = 0.0;
};

struct LossGrads {
    Matrix dz;      // d x N
    Matrix dc_bar;  // N x N
};

// ||Z - Z C||_F^2, the self-expressive residual.
double loss_se_residual(const Matrix& z, const Matrix& c_bar);

// tr(Z L Z^T); equals half the weighted sum of squared column differences.
double loss_temporal(const Matrix& z, const Matrix& lap);

LossBreakdown total_loss(const Matrix& z, const Matrix& c_bar, const Matrix& lap,
                         const LossWeights& weights);

// dL/dZ = -rho' + 2*l1*(Z - Z C)(I - C)^T + 2*l2*Z L
// dL/dC = -2*l1*Z^T (Z - Z C)
LossGrads total_loss_grads(const Matrix& z, const Matrix& c_bar, const Matrix& lap,
                           const LossWeights& weights);

// Relaxed per-column rate: mean_j logdet(I + (d/eps^2) Z Diag(gamma_j) Z^T).
// Diagnostic only, never part of the training objective.
double rho_relaxed(const Matrix& z, const Matrix& gamma, double eps);

// Normalized commutator norm between the Gram matrix Z^T Z and
// M = (I - C)(I - C)^T + (lambda2/lambda1) L. Zero iff they share eigenspaces.
double commutator_diagnostic(const Matrix& z, const Matrix& c_bar, const Matrix& lap,
                             const LossWeights& weights);

}  // namespace tdsc
