#include "tdsc/affinity.hpp"

#include <cmath>
#include <string>

#include "tdsc/errors.hpp"

namespace tdsc {

Matrix temporal_weights(Index n, Index s) {
    Matrix w = Matrix::Zero(n, n);
    const double half = static_cast<double>(s) / 2.0;
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            if (i != j && std::abs(static_cast<double>(i - j)) <= half) w(i, j) = 1.0;
        }
    }
    return w;
}

Matrix graph_laplacian(const Matrix& w) {
    if (w.rows() != w.cols()) {
        throw DimensionMismatch("graph_laplacian: non-square input");
    }
    if ((w - w.transpose()).cwiseAbs().maxCoeff() > 0.0) {
        throw AsymmetricInput("graph_laplacian: input is not symmetric");
    }
    Matrix l = -w;
    l.diagonal() += w.rowwise().sum();
    return l;
}

Matrix similarity(const Matrix& y_tilde) {
    return y_tilde.transpose() * y_tilde;
}

Matrix mask_and_lift(const Matrix& s, const TemporalMask& mask, double kappa) {
    if (s.rows() != s.cols() || s.rows() != mask.n) {
        throw DimensionMismatch("mask_and_lift: similarity/mask size disagreement");
    }
    if (kappa <= 0.0) {
        throw InvalidConfig("mask_and_lift: kappa must be positive");
    }
    const Index n = s.rows();
    Matrix k = Matrix::Zero(n, n);
    for (Index j = 0; j < n; ++j) {
        const Index lo = std::max<Index>(0, j - mask.tau);
        const Index hi = std::min<Index>(n - 1, j + mask.tau);
        for (Index i = lo; i <= hi; ++i) {
            if (i != j) k(i, j) = std::exp(s(i, j) / kappa);
        }
    }
    return k;
}

SinkhornTrace sinkhorn_forward(const Matrix& k, int iters, double tol) {
    const Index n = k.rows();
    if (n != k.cols()) throw DimensionMismatch("sinkhorn: non-square input");
    if (k.minCoeff() < 0.0) {
        throw InvalidConfig("sinkhorn: input has negative entries");
    }
    for (Index i = 0; i < n; ++i) {
        if (k.row(i).maxCoeff() <= 0.0) {
            throw EmptyRowOrColumn("sinkhorn: row " + std::to_string(i) + " has no positive entry");
        }
        if (k.col(i).maxCoeff() <= 0.0) {
            throw EmptyRowOrColumn("sinkhorn: column " + std::to_string(i) +
                                   " has no positive entry");
        }
    }

    SinkhornTrace trace;
    Matrix m = k;
    for (int sweep = 0; sweep < iters; ++sweep) {
        Vector c = m.colwise().sum();
        Matrix mc = m * c.cwiseInverse().asDiagonal();
        Vector r = mc.rowwise().sum();
        Matrix mr = r.cwiseInverse().asDiagonal() * mc;

        trace.col_sums.push_back(std::move(c));
        trace.after_col.push_back(std::move(mc));
        trace.row_sums.push_back(std::move(r));
        trace.after_row.push_back(mr);

        // Row sums are exact after the row step; only column sums can drift.
        const double dev = (mr.colwise().sum().array() - 1.0).abs().maxCoeff();
        trace.deviations.push_back(dev);
        m = std::move(mr);
        ++trace.sweeps_run;
        if (tol > 0.0 && dev < tol) break;
    }
    trace.output = m;
    return trace;
}

Matrix sinkhorn_project(const Matrix& k, int iters, double tol) {
    return sinkhorn_forward(k, iters, tol).output;
}

Matrix sinkhorn_backward(const SinkhornTrace& trace, const Matrix& grad_out) {
    if (trace.sweeps_run == 0) return grad_out;
    if (grad_out.rows() != trace.output.rows() || grad_out.cols() != trace.output.cols()) {
        throw DimensionMismatch("sinkhorn_backward: gradient shape mismatch");
    }
    Matrix g = grad_out;
    const Index n = g.rows();
    for (int sweep = trace.sweeps_run - 1; sweep >= 0; --sweep) {
        // Undo row normalization Y = Diag(1/r) M:
        // dM_pq = (dY_pq - <dY_p., Y_p.>) / r_p
        {
            const Matrix& y = trace.after_row[static_cast<size_t>(sweep)];
            const Vector& r = trace.row_sums[static_cast<size_t>(sweep)];
            for (Index p = 0; p < n; ++p) {
                const double dot = g.row(p).dot(y.row(p));
                g.row(p) = (g.row(p).array() - dot) / r(p);
            }
        }
        // Undo column normalization Y = M Diag(1/c):
        // dM_pq = (dY_pq - <dY_.q, Y_.q>) / c_q
        {
            const Matrix& y = trace.after_col[static_cast<size_t>(sweep)];
            const Vector& c = trace.col_sums[static_cast<size_t>(sweep)];
            for (Index q = 0; q < n; ++q) {
                const double dot = g.col(q).dot(y.col(q));
                g.col(q) = (g.col(q).array() - dot) / c(q);
            }
        }
    }
    return g;
}

double momentum_schedule(double alpha0, int t, int total_iters) {
    if (alpha0 <= 0.0 || alpha0 > 1.0) {
        throw InvalidConfig("momentum_schedule: alpha0 must be in (0, 1]");
    }
    if (t < 1 || t > total_iters) {
        throw InvalidConfig("momentum_schedule: t must be in [1, T]");
    }
    return alpha0 * (1.0 - static_cast<double>(t) / static_cast<double>(total_iters));
}

AffinityState make_affinity_state(Index n, Index s, double alpha0, int total_iters,
                                  bool normalized_init) {
    AffinityState state;
    state.alpha0 = alpha0;
    state.total_iters = total_iters;
    state.t = 0;
    Matrix w = temporal_weights(n, s);
    if (normalized_init) {
        for (Index i = 0; i < n; ++i) {
            const double sum = w.row(i).sum();
            if (sum > 0.0) w.row(i) /= sum;
        }
    }
    state.c_bar = w;
    state.c = Matrix::Zero(n, n);
    return state;
}

AffinityState tma_update(AffinityState state, const Matrix& c_new) {
    if (c_new.rows() != state.c_bar.rows() || c_new.cols() != state.c_bar.cols()) {
        throw DimensionMismatch("tma_update: coefficient shape mismatch");
    }
    const double alpha = momentum_schedule(state.alpha0, state.t + 1, state.total_iters);
    state.c_bar = (1.0 - alpha) * state.c_bar + alpha * c_new;
    state.c_bar.diagonal().setZero();
    state.c = c_new;
    state.t += 1;
    return state;
}

Matrix symmetrize(const Matrix& c_bar) {
    if (c_bar.rows() != c_bar.cols()) {
        throw DimensionMismatch("symmetrize: non-square input");
    }
    return 0.5 * (c_bar.cwiseAbs() + c_bar.transpose().cwiseAbs());
}

}  // namespace tdsc
