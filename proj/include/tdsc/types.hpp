#pragma once

#include <Eigen/Dense>

namespace tdsc {

// Dense double-precision matrices everywhere. Storage is column-major
// (Eigen's default); feature matrices are D x N with one frame per column.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline bool all_finite(const Matrix& m) {
    return m.allFinite();
}

}  // namespace tdsc
