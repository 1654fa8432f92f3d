#pragma once

#include <vector>

#include "tdsc/types.hpp"

namespace tdsc {

// Dense labels in [0, k). Build through make_label_vector so arbitrary ids
// are compacted; metrics are invariant to the relabeling.
struct LabelVector {
    std::vector<int> labels;
    int k = 0;
};

LabelVector make_label_vector(const std::vector<int>& raw);

// Minimum-cost perfect assignment on a square cost matrix, shortest
// augmenting paths. assignment[row] = column.
std::vector<int> hungarian(const Matrix& cost);

// Fraction of frames matched under the best label permutation.
double accuracy(const LabelVector& pred, const LabelVector& gt);

enum class NmiNorm { arithmetic, geometric };

// Mutual information over entropy mean. Both partitions single-class: 1.0;
// exactly one single-class: 0.0.
double nmi(const LabelVector& pred, const LabelVector& gt,
           NmiNorm norm = NmiNorm::arithmetic);

}  // namespace tdsc
