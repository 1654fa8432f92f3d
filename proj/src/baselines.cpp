#include "tdsc/baselines.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <string>

#include "tdsc/errors.hpp"
#include "tdsc/metrics.hpp"

namespace tdsc {

Matrix lsr_coefficients(const Matrix& x, double gamma) {
    if (gamma <= 0.0) throw InvalidConfig("gamma must be positive");
    if (x.size() == 0) throw DimensionMismatch("empty feature matrix");
    const Index n = x.cols();
    const Matrix gram = x.transpose() * x;
    const Matrix lhs = gram + gamma * Matrix::Identity(n, n);
    Eigen::LLT<Matrix> llt(lhs);
    if (llt.info() != Eigen::Success) {
        throw FactorizationFailed("ridge system not positive definite at gamma = " +
                                  std::to_string(gamma));
    }
    return llt.solve(gram);
}

double normalized_cut_value(const Matrix& a, const std::vector<int>& labels, int k) {
    if (a.rows() != a.cols() || static_cast<size_t>(a.rows()) != labels.size()) {
        throw DimensionMismatch("affinity and labels disagree");
    }
    const Index n = a.rows();
    std::vector<double> vol(static_cast<size_t>(k), 0.0);
    std::vector<double> assoc(static_cast<size_t>(k), 0.0);
    const Vector degree = a.rowwise().sum();
    for (Index i = 0; i < n; ++i) {
        const int c = labels[static_cast<size_t>(i)];
        if (c < 0 || c >= k) throw InvalidConfig("label outside [0, k)");
        vol[static_cast<size_t>(c)] += degree(i);
        for (Index j = 0; j < n; ++j) {
            if (labels[static_cast<size_t>(j)] == c) assoc[static_cast<size_t>(c)] += a(i, j);
        }
    }
    double total = 0.0;
    for (int c = 0; c < k; ++c) {
        const double v = vol[static_cast<size_t>(c)];
        // Clamp: vol - assoc is a sum of nonnegative cut weights, but the
        // subtraction can land an epsilon below zero when the cut is empty.
        if (v > 0.0) total += std::max(0.0, (v - assoc[static_cast<size_t>(c)]) / v);
    }
    return total;
}

LsrResult lsr_cluster(const Matrix& x, const LsrConfig& cfg, const SpectralConfig& spectral,
                      const std::optional<std::vector<int>>& ground_truth) {
    std::vector<double> grid = cfg.gamma_grid.empty() ? std::vector<double>{cfg.gamma}
                                                      : cfg.gamma_grid;
    std::sort(grid.begin(), grid.end());

    std::optional<LabelVector> gt;
    if (ground_truth) {
        if (static_cast<Index>(ground_truth->size()) != x.cols()) {
            throw LengthMismatch("ground-truth labels do not match frame count");
        }
        gt = make_label_vector(*ground_truth);
    }

    LsrResult best;
    bool have_best = false;
    for (double gamma : grid) {
        const Matrix c = lsr_coefficients(x, gamma);
        const Matrix a = 0.5 * (c.cwiseAbs() + c.transpose().cwiseAbs());
        std::vector<int> labels = spectral_clustering(a, spectral);
        double score;
        if (gt) {
            score = accuracy(make_label_vector(labels), *gt);
        } else {
            score = normalized_cut_value(a, labels, spectral.k);
        }
        const bool better =
            !have_best || (gt ? score > best.score : score < best.score);
        if (better) {
            best.labels = std::move(labels);
            best.gamma = gamma;
            best.score = score;
            have_best = true;
        }
    }
    return best;
}

}  // namespace tdsc
