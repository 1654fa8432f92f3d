#include "tdsc/metrics.hpp"

#include <cmath>
#include <limits>

#include "doctest.h"
#include "oracles.hpp"
#include "tdsc/errors.hpp"
#include "tdsc/rng.hpp"

using namespace tdsc;

namespace {

double assignment_cost(const Matrix& cost, const std::vector<int>& assignment) {
    double total = 0.0;
    for (size_t i = 0; i < assignment.size(); ++i) {
        total += cost(static_cast<Index>(i), assignment[i]);
    }
    return total;
}

}  // namespace

TEST_CASE("assignment on 2x2 costs picks the zero diagonal") {
    Matrix keep(2, 2);
    keep << 0, 1, 1, 0;
    const std::vector<int> id = hungarian(keep);
    CHECK(id[0] == 0);
    CHECK(id[1] == 1);

    Matrix swap(2, 2);
    swap << 1, 0, 0, 1;
    const std::vector<int> sw = hungarian(swap);
    CHECK(sw[0] == 1);
    CHECK(sw[1] == 0);
}

TEST_CASE("assignment cost equals exhaustive search") {
    Rng rng(113);
    for (int trial = 0; trial < 200; ++trial) {
        const Index k = 2 + static_cast<Index>(rng.index(5));
        Matrix cost(k, k);
        for (Index i = 0; i < k; ++i) {
            for (Index j = 0; j < k; ++j) cost(i, j) = std::floor(20.0 * rng.uniform());
        }
        const double got = assignment_cost(cost, hungarian(cost));
        CHECK(got == doctest::Approx(oracles::min_assignment_cost(cost)).epsilon(1e-12));
    }
}

TEST_CASE("assignment rejects malformed costs") {
    Matrix bad(2, 2);
    bad << 0, 1, std::numeric_limits<double>::quiet_NaN(), 0;
    CHECK_THROWS_AS(hungarian(bad), NonFiniteEvaluation);
    CHECK_THROWS_AS(hungarian(Matrix::Zero(2, 3)), DimensionMismatch);
}

TEST_CASE("label compaction maps arbitrary ids onto a dense range") {
    const LabelVector lv = make_label_vector({7, 7, 3, 9, 3});
    CHECK(lv.k == 3);
    for (int l : lv.labels) {
        CHECK(l >= 0);
        CHECK(l < 3);
    }
    CHECK(lv.labels[0] == lv.labels[1]);
    CHECK(lv.labels[2] == lv.labels[4]);
    CHECK_THROWS_AS(make_label_vector({}), LengthMismatch);
}

TEST_CASE("accuracy closed forms") {
    const LabelVector gt = make_label_vector({0, 0, 1, 1, 2, 2});
    CHECK(accuracy(gt, gt) == doctest::Approx(1.0).epsilon(1e-15));

    const LabelVector renamed = make_label_vector({2, 2, 0, 0, 1, 1});
    CHECK(accuracy(renamed, gt) == doctest::Approx(1.0).epsilon(1e-15));

    const LabelVector p = make_label_vector({0, 0, 1, 1});
    const LabelVector g = make_label_vector({0, 1, 0, 1});
    CHECK(accuracy(p, g) == doctest::Approx(0.5).epsilon(1e-15));

    CHECK_THROWS_AS(accuracy(p, gt), LengthMismatch);
}

TEST_CASE("accuracy equals exhaustive label-permutation search") {
    Rng rng(127);
    for (int trial = 0; trial < 100; ++trial) {
        const int k = 2 + static_cast<int>(rng.index(5));
        const int n = 10 + static_cast<int>(rng.index(30));
        std::vector<int> pred(static_cast<size_t>(n)), gt(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            pred[static_cast<size_t>(i)] = static_cast<int>(rng.index(static_cast<std::uint64_t>(k)));
            gt[static_cast<size_t>(i)] = static_cast<int>(rng.index(static_cast<std::uint64_t>(k)));
        }
        // Force every id to appear so the compacted k matches.
        for (int c = 0; c < k; ++c) {
            pred[static_cast<size_t>(c)] = c;
            gt[static_cast<size_t>(n - 1 - c)] = c;
        }
        const double got = accuracy(make_label_vector(pred), make_label_vector(gt));
        CHECK(got == doctest::Approx(oracles::accuracy_exhaustive(pred, gt, k)).epsilon(1e-12));
    }
}

TEST_CASE("constant predictions score the largest class fraction") {
    const LabelVector gt = make_label_vector({0, 0, 0, 1, 1, 2});
    const LabelVector constant = make_label_vector({0, 0, 0, 0, 0, 0});
    CHECK(accuracy(constant, gt) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("mutual information closed forms") {
    const LabelVector gt = make_label_vector({0, 0, 1, 1});
    CHECK(nmi(gt, gt) == doctest::Approx(1.0).epsilon(1e-12));

    const LabelVector constant = make_label_vector({0, 0, 0, 0});
    CHECK(nmi(constant, gt) == doctest::Approx(0.0).epsilon(1e-15));

    const LabelVector p = make_label_vector({0, 0, 1, 1});
    const LabelVector g = make_label_vector({0, 1, 0, 1});
    CHECK(nmi(p, g) == doctest::Approx(0.0).epsilon(1e-12));

    // Both partitions trivial: defined as perfect agreement.
    CHECK(nmi(constant, constant) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("mutual information is invariant to relabeling either side") {
    Rng rng(131);
    std::vector<int> pred(40), gt(40);
    for (size_t i = 0; i < 40; ++i) {
        pred[i] = static_cast<int>(rng.index(3));
        gt[i] = static_cast<int>(rng.index(3));
    }
    pred[0] = 0; pred[1] = 1; pred[2] = 2;
    gt[0] = 0; gt[1] = 1; gt[2] = 2;

    std::vector<int> pred_renamed(40), gt_renamed(40);
    const int pmap[3] = {2, 0, 1};
    const int gmap[3] = {1, 2, 0};
    for (size_t i = 0; i < 40; ++i) {
        pred_renamed[i] = pmap[pred[i]];
        gt_renamed[i] = gmap[gt[i]];
    }
    const double base = nmi(make_label_vector(pred), make_label_vector(gt));
    const double renamed =
        nmi(make_label_vector(pred_renamed), make_label_vector(gt_renamed));
    CHECK(base == doctest::Approx(renamed).epsilon(1e-12));

    const double acc_base = accuracy(make_label_vector(pred), make_label_vector(gt));
    const double acc_renamed =
        accuracy(make_label_vector(pred_renamed), make_label_vector(gt_renamed));
    CHECK(acc_base == doctest::Approx(acc_renamed).epsilon(1e-12));
}

TEST_CASE("mutual information against a hand-computed contingency table") {
    // pred = [0,0,0,1,1,1], gt = [0,0,1,1,1,1]:
    // joint counts {00:2, 01:1, 11:3}, marginals pred {3,3}, gt {2,4}.
    const LabelVector p = make_label_vector({0, 0, 0, 1, 1, 1});
    const LabelVector g = make_label_vector({0, 0, 1, 1, 1, 1});
    auto cell = [](double joint, double pi, double qj) {
        return joint * std::log(joint / (pi * qj));
    };
    const double mi = cell(2.0 / 6.0, 3.0 / 6.0, 2.0 / 6.0) +
                      cell(1.0 / 6.0, 3.0 / 6.0, 4.0 / 6.0) +
                      cell(3.0 / 6.0, 3.0 / 6.0, 4.0 / 6.0);
    auto plogp = [](double x) { return x > 0.0 ? x * std::log(x) : 0.0; };
    const double hp = -plogp(3.0 / 6.0) - plogp(3.0 / 6.0);
    const double hg = -plogp(2.0 / 6.0) - plogp(4.0 / 6.0);
    CHECK(nmi(p, g) == doctest::Approx(mi / (0.5 * (hp + hg))).epsilon(1e-12));
    CHECK(nmi(p, g, NmiNorm::geometric) ==
          doctest::Approx(mi / std::sqrt(hp * hg)).epsilon(1e-12));
}
