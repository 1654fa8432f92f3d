#include "tdsc/affinity.hpp"

#include <cmath>

#include "doctest.h"
#include "tdsc/errors.hpp"
#include "tdsc/rng.hpp"

using namespace tdsc;

namespace {

// Strictly positive banded matrix with the given half-width.
Matrix random_banded(Index n, Index band, Rng& rng) {
    Matrix m = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            if (std::abs(static_cast<long>(i - j)) <= band) m(i, j) = 0.1 + rng.uniform();
        }
    }
    return m;
}

}  // namespace

TEST_CASE("temporal weights form the expected bands") {
    const Matrix w = temporal_weights(4, 2);
    for (Index i = 0; i < 4; ++i) {
        for (Index j = 0; j < 4; ++j) {
            const double expected = (std::abs(static_cast<long>(i - j)) == 1) ? 1.0 : 0.0;
            CHECK(w(i, j) == expected);
        }
    }

    CHECK(temporal_weights(3, 0).cwiseAbs().maxCoeff() == 0.0);

    const Matrix wide = temporal_weights(5, 8);
    for (Index i = 0; i < 5; ++i) {
        for (Index j = 0; j < 5; ++j) {
            CHECK(wide(i, j) == (i == j ? 0.0 : 1.0));
        }
    }
}

TEST_CASE("graph laplacian of a 3-node path") {
    Matrix w = Matrix::Zero(3, 3);
    w(0, 1) = w(1, 0) = 1.0;
    w(1, 2) = w(2, 1) = 1.0;
    Matrix expected(3, 3);
    expected << 1, -1, 0, -1, 2, -1, 0, -1, 1;
    CHECK((graph_laplacian(w) - expected).cwiseAbs().maxCoeff() == 0.0);

    CHECK(graph_laplacian(Matrix::Zero(4, 4)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("graph laplacian annihilates constants and is positive semidefinite") {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const Index n = 3 + static_cast<Index>(rng.index(6));
        Matrix w = Matrix::Zero(n, n);
        for (Index i = 0; i < n; ++i) {
            for (Index j = i + 1; j < n; ++j) {
                const double v = rng.uniform() < 0.5 ? 0.0 : rng.uniform();
                w(i, j) = w(j, i) = v;
            }
        }
        const Matrix l = graph_laplacian(w);
        CHECK((l * Vector::Ones(n)).cwiseAbs().maxCoeff() < 1e-12);
        Eigen::SelfAdjointEigenSolver<Matrix> eig(l);
        CHECK(eig.eigenvalues().minCoeff() > -1e-10);
    }
}

TEST_CASE("graph laplacian rejects asymmetric input") {
    Matrix w = Matrix::Zero(2, 2);
    w(0, 1) = 1.0;
    CHECK_THROWS_AS(graph_laplacian(w), AsymmetricInput);
}

TEST_CASE("similarity of orthonormal and duplicated columns") {
    CHECK((similarity(Matrix::Identity(3, 3)) - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <
          1e-15);

    Matrix y(2, 2);
    y.col(0) << 0.6, 0.8;
    y.col(1) = y.col(0);
    CHECK(similarity(y)(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("similarity equals pairwise dot products") {
    Rng rng(23);
    Matrix y(4, 6);
    for (Index j = 0; j < 6; ++j) {
        for (Index i = 0; i < 4; ++i) y(i, j) = rng.gaussian();
        y.col(j).normalize();
    }
    const Matrix s = similarity(y);
    for (Index i = 0; i < 6; ++i) {
        for (Index j = 0; j < 6; ++j) {
            CHECK(std::abs(s(i, j) - y.col(i).dot(y.col(j))) < 1e-12);
        }
    }
    CHECK((s - s.transpose()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(s.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
}

TEST_CASE("mask and lift support semantics") {
    const Matrix s = Matrix::Zero(4, 4);
    const Matrix k = mask_and_lift(s, {4, 2}, 1.0);
    for (Index i = 0; i < 4; ++i) {
        for (Index j = 0; j < 4; ++j) {
            const long gap = std::abs(static_cast<long>(i - j));
            CHECK(k(i, j) == (gap > 0 && gap <= 2 ? 1.0 : 0.0));
        }
    }

    CHECK(mask_and_lift(s, {4, 0}, 1.0).cwiseAbs().maxCoeff() == 0.0);

    Rng rng(3);
    Matrix r(5, 5);
    for (Index i = 0; i < 25; ++i) r(i / 5, i % 5) = rng.gaussian();
    const Matrix lifted = mask_and_lift(r, {5, 1}, 0.7);
    for (Index i = 0; i < 5; ++i) {
        for (Index j = 0; j < 5; ++j) {
            if (std::abs(static_cast<long>(i - j)) == 1) {
                CHECK(lifted(i, j) == doctest::Approx(std::exp(r(i, j) / 0.7)).epsilon(1e-14));
            } else {
                CHECK(lifted(i, j) == 0.0);
            }
        }
    }
}

TEST_CASE("sinkhorn splits a symmetric two-neighbor kernel evenly") {
    Matrix k = Matrix::Ones(3, 3);
    k.diagonal().setZero();
    const Matrix p = sinkhorn_project(k, 50, 1e-12);
    for (Index i = 0; i < 3; ++i) {
        for (Index j = 0; j < 3; ++j) {
            CHECK(p(i, j) == doctest::Approx(i == j ? 0.0 : 0.5).epsilon(1e-10));
        }
    }
}

TEST_CASE("sinkhorn leaves a doubly stochastic matrix unchanged") {
    Matrix k(3, 3);
    k << 0.0, 0.5, 0.5, 0.5, 0.0, 0.5, 0.5, 0.5, 0.0;
    const Matrix p = sinkhorn_project(k, 10, 0.0);
    CHECK((p - k).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("sinkhorn reaches unit marginals on positive banded input") {
    Rng rng(31);
    const Matrix k = random_banded(6, 2, rng);
    const Matrix p = sinkhorn_project(k, 50, 0.0);
    CHECK((p.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-6);
    CHECK((p.colwise().sum().array() - 1.0).abs().maxCoeff() < 1e-6);
}

TEST_CASE("sinkhorn preserves support exactly and rejects empty rows") {
    Rng rng(37);
    const Matrix k = random_banded(8, 1, rng);
    const Matrix p = sinkhorn_project(k, 20, 0.0);
    for (Index i = 0; i < 8; ++i) {
        for (Index j = 0; j < 8; ++j) {
            CHECK((p(i, j) == 0.0) == (k(i, j) == 0.0));
        }
    }

    Matrix bad = Matrix::Ones(3, 3);
    bad.row(1).setZero();
    CHECK_THROWS_AS(sinkhorn_project(bad, 5, 0.0), EmptyRowOrColumn);
}

TEST_CASE("sinkhorn marginal deviation decreases monotonically") {
    // Positive banded kernels, 100 seeds; the recorded per-sweep deviations
    // must never increase (ties allowed at convergence).
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        const Index n = 4 + static_cast<Index>(rng.index(8));
        const Index band = 1 + static_cast<Index>(rng.index(3));
        const SinkhornTrace trace = sinkhorn_forward(random_banded(n, band, rng), 30, 0.0);
        for (size_t s = 1; s < trace.deviations.size(); ++s) {
            CHECK(trace.deviations[s] <= trace.deviations[s - 1] + 1e-15);
        }
    }
}

TEST_CASE("sinkhorn rows sum to one after every run") {
    Rng rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix p = sinkhorn_project(random_banded(7, 2, rng), 1 + trial % 5, 0.0);
        CHECK((p.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("momentum schedule endpoints and midpoint") {
    CHECK(momentum_schedule(0.9, 100, 100) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(momentum_schedule(0.9, 50, 100) == doctest::Approx(0.45).epsilon(1e-15));
    CHECK_THROWS_AS(momentum_schedule(0.0, 1, 10), InvalidConfig);
    CHECK_THROWS_AS(momentum_schedule(0.9, 0, 10), InvalidConfig);
    CHECK_THROWS_AS(momentum_schedule(0.9, 11, 10), InvalidConfig);
}

TEST_CASE("running mean starts from row-normalized window weights") {
    const AffinityState state = make_affinity_state(5, 2, 0.9, 100);
    Matrix expected = temporal_weights(5, 2);
    for (Index i = 0; i < 5; ++i) expected.row(i) /= expected.row(i).sum();
    CHECK((state.c_bar - expected).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(state.t == 0);

    const AffinityState raw = make_affinity_state(5, 2, 0.9, 100, false);
    CHECK((raw.c_bar - temporal_weights(5, 2)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("running mean update is the scheduled convex combination") {
    Rng rng(43);
    AffinityState state = make_affinity_state(4, 2, 0.8, 10);
    Matrix c_new = Matrix::Zero(4, 4);
    for (Index i = 0; i < 4; ++i) {
        for (Index j = 0; j < 4; ++j) {
            if (i != j) c_new(i, j) = rng.uniform();
        }
    }

    const Matrix before = state.c_bar;
    state = tma_update(std::move(state), c_new);
    const double alpha = momentum_schedule(0.8, 1, 10);
    Matrix expected = (1.0 - alpha) * before + alpha * c_new;
    expected.diagonal().setZero();
    CHECK((state.c_bar - expected).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(state.t == 1);
    CHECK((state.c - c_new).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("running mean update at a zero momentum weight is a no-op") {
    AffinityState state = make_affinity_state(3, 2, 0.9, 5);
    state.t = 4;  // the next update lands on t = T, where the schedule hits 0
    const Matrix before = state.c_bar;
    Matrix c_new = Matrix::Ones(3, 3);
    c_new.diagonal().setZero();
    state = tma_update(std::move(state), c_new);
    CHECK((state.c_bar - before).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("running mean entries stay inside the historical envelope") {
    Rng rng(47);
    AffinityState state = make_affinity_state(4, 2, 0.9, 20);
    Matrix lo = state.c_bar;
    Matrix hi = state.c_bar;
    for (int step = 0; step < 20; ++step) {
        Matrix c_new = Matrix::Zero(4, 4);
        for (Index i = 0; i < 4; ++i) {
            for (Index j = 0; j < 4; ++j) {
                if (i != j) c_new(i, j) = rng.uniform();
            }
        }
        lo = lo.cwiseMin(c_new);
        hi = hi.cwiseMax(c_new);
        state = tma_update(std::move(state), c_new);
        CHECK(((state.c_bar - lo).array() >= -1e-12).all());
        CHECK(((hi - state.c_bar).array() >= -1e-12).all());
    }
}

TEST_CASE("running mean update rejects shape mismatches") {
    AffinityState state = make_affinity_state(4, 2, 0.9, 10);
    CHECK_THROWS_AS(tma_update(std::move(state), Matrix::Zero(3, 3)), DimensionMismatch);
}

TEST_CASE("symmetrization averages absolute values") {
    Matrix sym = Matrix::Zero(3, 3);
    sym(0, 1) = sym(1, 0) = 0.2;
    CHECK((symmetrize(sym) - sym).cwiseAbs().maxCoeff() < 1e-15);

    Matrix single = Matrix::Zero(3, 3);
    single(0, 1) = 0.8;
    const Matrix a = symmetrize(single);
    CHECK(a(0, 1) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(a(1, 0) == doctest::Approx(0.4).epsilon(1e-15));

    Rng rng(53);
    Matrix r(5, 5);
    for (Index i = 0; i < 25; ++i) r(i / 5, i % 5) = rng.gaussian();
    r.diagonal().setZero();
    const Matrix ar = symmetrize(r);
    CHECK((ar - ar.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(ar.minCoeff() >= 0.0);
    CHECK(ar.diagonal().cwiseAbs().maxCoeff() == 0.0);
}
