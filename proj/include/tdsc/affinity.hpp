#pragma once

#include <vector>

#include "tdsc/types.hpp"

namespace tdsc {

// Band mask on self-expressive coefficients: entry (i,j) is admissible iff
// 0 < |i - j| <= tau. The diagonal is never admissible.
struct TemporalMask {
    Index n;
    Index tau;

    bool admissible(Index i, Index j) const {
        const Index d = i > j ? i - j : j - i;
        return d > 0 && d <= tau;
    }
};

// Binary sliding-window adjacency: w_ij = 1 iff |i - j| <= s/2 and i != j.
// Self-loops are dropped; they cancel in the Laplacian quadratic form anyway.
Matrix temporal_weights(Index n, Index s);

// L = Diag(w 1) - w. Requires w square, symmetric, nonnegative.
Matrix graph_laplacian(const Matrix& w);

// Cosine similarities of the cluster head: S = Y~^T Y~ for unit-norm columns.
Matrix similarity(const Matrix& y_tilde);

// exp(s_ij / kappa) on the admissible support of the mask, exact zero
// elsewhere. The lift keeps the kernel nonnegative for Sinkhorn.
Matrix mask_and_lift(const Matrix& s, const TemporalMask& mask, double kappa);

// Everything the reverse sweep needs from a Sinkhorn run. One sweep is a
// column normalization followed by a row normalization, so the output always
// has unit row sums on its support.
struct SinkhornTrace {
    std::vector<Vector> col_sums;      // per sweep, before column scaling
    std::vector<Matrix> after_col;     // per sweep, after column scaling
    std::vector<Vector> row_sums;      // per sweep, before row scaling
    std::vector<Matrix> after_row;     // per sweep, after row scaling
    std::vector<double> deviations;    // per sweep, max |col sum - 1| after the sweep
    Matrix output;
    int sweeps_run = 0;
};

// Alternating normalization toward unit row/column sums, run for `iters`
// sweeps or until the max row/col-sum deviation drops below `tol`
// (tol <= 0 disables early stopping). Support is preserved exactly.
// Throws EmptyRowOrColumn if some row or column has no positive entry.
SinkhornTrace sinkhorn_forward(const Matrix& k, int iters, double tol);

// Convenience wrapper returning only the projected matrix.
Matrix sinkhorn_project(const Matrix& k, int iters, double tol);

// Pullback of a gradient w.r.t. the Sinkhorn output onto the input kernel,
// unrolling exactly the sweeps recorded in the trace.
Matrix sinkhorn_backward(const SinkhornTrace& trace, const Matrix& grad_out);

// alpha(t) = alpha0 * (1 - t/T), the linearly decaying momentum weight.
double momentum_schedule(double alpha0, int t, int total_iters);

// Running-mean state of the coefficient matrix.
struct AffinityState {
    Matrix c;        // most recent projected coefficients
    Matrix c_bar;    // running mean
    int t = 0;       // completed updates
    double alpha0 = 0.9;
    int total_iters = 1;
};

// Fresh state with c_bar initialized from the temporal window weights;
// rows scaled to sum 1 on their support when `normalized_init` is set.
AffinityState make_affinity_state(Index n, Index s, double alpha0, int total_iters,
                                  bool normalized_init = true);

// c_bar <- (1 - alpha(t+1)) * c_bar + alpha(t+1) * c_new, diagonal re-zeroed,
// t incremented. The applied weight is momentum_schedule(alpha0, t+1, T).
AffinityState tma_update(AffinityState state, const Matrix& c_new);

// A = (|C| + |C^T|) / 2.
Matrix symmetrize(const Matrix& c_bar);

}  // namespace tdsc
