#pragma once

#include <cstdint>
#include <vector>

#include "tdsc/types.hpp"

namespace tdsc {

struct SpectralConfig {
    int k = 2;
    int kmeans_restarts = 10;
    int kmeans_max_iter = 300;
    std::uint64_t seed = 0;
};

// Rows are the k smallest-eigenvalue eigenvectors of the symmetric normalized
// Laplacian I - D^{-1/2} A D^{-1/2}, renormalized to unit length per row.
// Zero rows stay zero. Ascending eigenvalues; each eigenvector's
// largest-magnitude entry is made positive so output is backend-independent.
Matrix spectral_embed(const Matrix& a, int k);

// Best-of-restarts Lloyd iterations with distance-weighted seeding; returns
// the labels of the restart with the smallest within-cluster sum of squares
// (ties keep the earlier restart). Points are rows of e.
std::vector<int> kmeans(const Matrix& e, const SpectralConfig& cfg);

// spectral_embed + kmeans. Frames with zero degree get the label of the
// nearest frame with positive degree (earlier frame wins ties).
std::vector<int> spectral_clustering(const Matrix& a, const SpectralConfig& cfg);

}  // namespace tdsc
