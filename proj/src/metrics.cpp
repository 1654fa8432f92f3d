#include "tdsc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "tdsc/errors.hpp"

namespace tdsc {

namespace {

void check_lengths(const LabelVector& a, const LabelVector& b) {
    if (a.labels.size() != b.labels.size()) {
        throw LengthMismatch("label vectors have lengths " + std::to_string(a.labels.size()) +
                             " and " + std::to_string(b.labels.size()));
    }
    if (a.labels.empty()) throw LengthMismatch("label vectors are empty");
}

// Joint counts, k_a x k_b.
Matrix contingency(const LabelVector& a, const LabelVector& b) {
    Matrix counts = Matrix::Zero(a.k, b.k);
    for (size_t i = 0; i < a.labels.size(); ++i) {
        counts(a.labels[i], b.labels[i]) += 1.0;
    }
    return counts;
}

double entropy(const Vector& counts, double n) {
    double h = 0.0;
    for (Index i = 0; i < counts.size(); ++i) {
        if (counts(i) > 0.0) {
            const double p = counts(i) / n;
            h -= p * std::log(p);
        }
    }
    return h;
}

}  // namespace

LabelVector make_label_vector(const std::vector<int>& raw) {
    if (raw.empty()) throw LengthMismatch("label vector is empty");
    std::map<int, int> remap;
    for (int id : raw) remap.emplace(id, 0);
    int next = 0;
    for (auto& [id, dense] : remap) dense = next++;
    LabelVector out;
    out.labels.reserve(raw.size());
    for (int id : raw) out.labels.push_back(remap[id]);
    out.k = next;
    return out;
}

std::vector<int> hungarian(const Matrix& cost) {
    if (cost.rows() != cost.cols() || cost.rows() == 0) {
        throw DimensionMismatch("cost matrix must be square and nonempty");
    }
    if (!all_finite(cost)) {
        throw NonFiniteEvaluation("cost matrix has NaN/Inf entries");
    }
    const int n = static_cast<int>(cost.rows());
    const double inf = std::numeric_limits<double>::infinity();
    // Potentials and column->row matching with a virtual 0 slot.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> match(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const int i0 = match[j0];
            int j1 = -1;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        // Walk the augmenting path backwards.
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> assignment(static_cast<size_t>(n), -1);
    for (int j = 1; j <= n; ++j) {
        assignment[static_cast<size_t>(match[j] - 1)] = j - 1;
    }
    return assignment;
}

double accuracy(const LabelVector& pred, const LabelVector& gt) {
    check_lengths(pred, gt);
    const int k = std::max(pred.k, gt.k);
    Matrix confusion = Matrix::Zero(k, k);
    for (size_t i = 0; i < pred.labels.size(); ++i) {
        confusion(pred.labels[i], gt.labels[i]) += 1.0;
    }
    const std::vector<int> assign = hungarian(-confusion);
    double matched = 0.0;
    for (int i = 0; i < k; ++i) matched += confusion(i, assign[static_cast<size_t>(i)]);
    return matched / static_cast<double>(pred.labels.size());
}

double nmi(const LabelVector& pred, const LabelVector& gt, NmiNorm norm) {
    check_lengths(pred, gt);
    if (pred.k == 1 && gt.k == 1) return 1.0;
    if (pred.k == 1 || gt.k == 1) return 0.0;
    const double n = static_cast<double>(pred.labels.size());
    const Matrix joint = contingency(pred, gt);
    const Vector row = joint.rowwise().sum();
    const Vector col = joint.colwise().sum();
    double mi = 0.0;
    for (Index i = 0; i < joint.rows(); ++i) {
        for (Index j = 0; j < joint.cols(); ++j) {
            const double nij = joint(i, j);
            if (nij > 0.0) {
                mi += (nij / n) * std::log(nij * n / (row(i) * col(j)));
            }
        }
    }
    const double hp = entropy(row, n);
    const double hg = entropy(col, n);
    const double denom =
        norm == NmiNorm::arithmetic ? 0.5 * (hp + hg) : std::sqrt(hp * hg);
    if (denom <= 0.0) return 0.0;
    // Counting noise can push the ratio a hair past 1.
    return std::min(1.0, std::max(0.0, mi / denom));
}

}  // namespace tdsc
