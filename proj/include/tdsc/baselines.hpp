#pragma once

#include <optional>
#include <vector>

#include "tdsc/clustering.hpp"
#include "tdsc/types.hpp"

namespace tdsc {

struct LsrConfig {
    double gamma = 10.0;
    std::vector<double> gamma_grid = {1, 2, 5, 10, 20, 50, 100, 200, 400, 800, 1600, 3200};
};

// Ridge self-expression C = (X^T X + gamma I)^{-1} X^T X.
Matrix lsr_coefficients(const Matrix& x, double gamma);

struct LsrResult {
    std::vector<int> labels;
    double gamma = 0.0;  // selected grid point
    double score = 0.0;  // accuracy when ground truth given, else cut value
};

// Sum over clusters of cut(c)/vol(c) on affinity a; zero-volume clusters
// contribute zero.
double normalized_cut_value(const Matrix& a, const std::vector<int>& labels, int k);

// Symmetrize each grid C as (|C| + |C^T|)/2, spectral-cluster, keep the best
// grid point: highest accuracy when ground truth is given, else smallest
// normalized cut. Ties go to the smallest gamma.
LsrResult lsr_cluster(const Matrix& x, const LsrConfig& cfg, const SpectralConfig& spectral,
                      const std::optional<std::vector<int>>& ground_truth = std::nullopt);

}  // namespace tdsc
