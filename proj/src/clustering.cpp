#include "tdsc/clustering.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <string>

#include "tdsc/errors.hpp"
#include "tdsc/rng.hpp"

namespace tdsc {

namespace {

constexpr double kSymTol = 1e-10;

void check_affinity(const Matrix& a) {
    if (a.rows() != a.cols() || a.rows() == 0) {
        throw DimensionMismatch("affinity must be square and nonempty");
    }
    if ((a.array() < 0.0).any()) {
        throw InvalidConfig("affinity must be nonnegative");
    }
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > kSymTol * scale) {
        throw AsymmetricInput("affinity must be symmetric");
    }
}

struct KmeansRun {
    std::vector<int> labels;
    double wcss = std::numeric_limits<double>::infinity();
};

// One seeding plus Lloyd iterations. Points are rows of e.
KmeansRun kmeans_once(const Matrix& e, int k, int max_iter, Rng& rng) {
    const Index n = e.rows();
    Matrix centroids(k, e.cols());

    // Distance-weighted seeding: next centroid drawn proportional to the
    // squared distance to the nearest one already chosen.
    Vector dist2 = Vector::Constant(n, std::numeric_limits<double>::infinity());
    centroids.row(0) = e.row(static_cast<Index>(rng.index(static_cast<std::uint64_t>(n))));
    for (int c = 1; c < k; ++c) {
        for (Index i = 0; i < n; ++i) {
            const double d = (e.row(i) - centroids.row(c - 1)).squaredNorm();
            if (d < dist2(i)) dist2(i) = d;
        }
        const double mass = dist2.sum();
        Index pick;
        if (mass <= 0.0) {
            pick = static_cast<Index>(rng.index(static_cast<std::uint64_t>(n)));
        } else {
            double target = rng.uniform() * mass;
            pick = n - 1;
            for (Index i = 0; i < n; ++i) {
                target -= dist2(i);
                if (target <= 0.0) {
                    pick = i;
                    break;
                }
            }
        }
        centroids.row(c) = e.row(pick);
    }

    std::vector<int> labels(static_cast<size_t>(n), 0);
    std::vector<Index> counts(static_cast<size_t>(k), 0);
    for (int iter = 0; iter < max_iter; ++iter) {
        bool changed = false;
        for (Index i = 0; i < n; ++i) {
            int best = 0;
            double best_d = (e.row(i) - centroids.row(0)).squaredNorm();
            for (int c = 1; c < k; ++c) {
                const double d = (e.row(i) - centroids.row(c)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (labels[static_cast<size_t>(i)] != best) {
                labels[static_cast<size_t>(i)] = best;
                changed = true;
            }
        }
        if (!changed && iter > 0) break;

        centroids.setZero();
        std::fill(counts.begin(), counts.end(), Index{0});
        for (Index i = 0; i < n; ++i) {
            centroids.row(labels[static_cast<size_t>(i)]) += e.row(i);
            ++counts[static_cast<size_t>(labels[static_cast<size_t>(i)])];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<size_t>(c)] > 0) {
                centroids.row(c) /= static_cast<double>(counts[static_cast<size_t>(c)]);
            } else {
                // Re-seed an empty cluster at the point farthest from its
                // current centroid, if any point is at positive distance.
                Index far = -1;
                double far_d = 0.0;
                for (Index i = 0; i < n; ++i) {
                    const double d =
                        (e.row(i) - centroids.row(labels[static_cast<size_t>(i)])).squaredNorm();
                    if (d > far_d) {
                        far_d = d;
                        far = i;
                    }
                }
                if (far >= 0) {
                    centroids.row(c) = e.row(far);
                    labels[static_cast<size_t>(far)] = c;
                }
            }
        }
    }

    KmeansRun run;
    run.labels = std::move(labels);
    run.wcss = 0.0;
    for (Index i = 0; i < n; ++i) {
        run.wcss += (e.row(i) - centroids.row(run.labels[static_cast<size_t>(i)])).squaredNorm();
    }
    return run;
}

}  // namespace

Matrix spectral_embed(const Matrix& a, int k) {
    check_affinity(a);
    const Index n = a.rows();
    if (k < 1) throw InvalidConfig("k must be at least 1");
    if (k > n) {
        throw KTooLarge("k = " + std::to_string(k) + " exceeds " + std::to_string(n) + " frames");
    }

    const Vector degree = a.rowwise().sum();
    Vector d_inv_sqrt(n);
    for (Index i = 0; i < n; ++i) {
        d_inv_sqrt(i) = degree(i) > 0.0 ? 1.0 / std::sqrt(degree(i)) : 0.0;
    }
    Matrix lap = Matrix::Identity(n, n) -
                 d_inv_sqrt.asDiagonal() * a * d_inv_sqrt.asDiagonal();
    // Exact symmetry keeps the eigensolver's ordering deterministic.
    lap = 0.5 * (lap + lap.transpose());

    Eigen::SelfAdjointEigenSolver<Matrix> eig(lap);
    if (eig.info() != Eigen::Success) {
        throw FactorizationFailed("eigendecomposition of the normalized laplacian failed");
    }
    Matrix embed = eig.eigenvectors().leftCols(k);

    for (Index c = 0; c < embed.cols(); ++c) {
        Index arg = 0;
        double best = -1.0;
        for (Index i = 0; i < n; ++i) {
            const double mag = std::abs(embed(i, c));
            if (mag > best) {
                best = mag;
                arg = i;
            }
        }
        if (embed(arg, c) < 0.0) embed.col(c) = -embed.col(c);
    }
    for (Index i = 0; i < n; ++i) {
        const double nrm = embed.row(i).norm();
        if (nrm > 0.0) embed.row(i) /= nrm;
    }
    return embed;
}

std::vector<int> kmeans(const Matrix& e, const SpectralConfig& cfg) {
    if (cfg.k < 1 || cfg.kmeans_restarts < 1 || cfg.kmeans_max_iter < 1) {
        throw InvalidConfig("k, restarts and max_iter must be positive");
    }
    if (e.rows() == 0) throw DimensionMismatch("empty embedding");
    if (cfg.k > e.rows()) {
        throw KTooLarge("k = " + std::to_string(cfg.k) + " exceeds " +
                        std::to_string(e.rows()) + " points");
    }
    if (!all_finite(e)) throw NonFiniteEvaluation("embedding has NaN/Inf entries");

    KmeansRun best;
    for (int restart = 0; restart < cfg.kmeans_restarts; ++restart) {
        Rng rng(cfg.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(restart));
        KmeansRun run = kmeans_once(e, cfg.k, cfg.kmeans_max_iter, rng);
        if (run.wcss < best.wcss) best = std::move(run);
    }
    return best.labels;
}

std::vector<int> spectral_clustering(const Matrix& a, const SpectralConfig& cfg) {
    const Matrix embed = spectral_embed(a, cfg.k);
    std::vector<int> labels = kmeans(embed, cfg);

    const Vector degree = a.rowwise().sum();
    const Index n = a.rows();
    bool any_connected = false;
    for (Index i = 0; i < n; ++i) {
        if (degree(i) > 0.0) {
            any_connected = true;
            break;
        }
    }
    if (!any_connected) return labels;

    for (Index i = 0; i < n; ++i) {
        if (degree(i) > 0.0) continue;
        for (Index off = 1; off < n; ++off) {
            const Index left = i - off;
            const Index right = i + off;
            if (left >= 0 && degree(left) > 0.0) {
                labels[static_cast<size_t>(i)] = labels[static_cast<size_t>(left)];
                break;
            }
            if (right < n && degree(right) > 0.0) {
                labels[static_cast<size_t>(i)] = labels[static_cast<size_t>(right)];
                break;
            }
        }
    }
    return labels;
}

}  // namespace tdsc
