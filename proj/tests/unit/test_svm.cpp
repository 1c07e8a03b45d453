#include "fastread/rng.hpp"
#include "fastread/svm.hpp"

#include "support/svm_oracle.hpp"

#include <doctest.h>

#include <cmath>

using namespace fastread;

namespace {

struct Instance {
    std::vector<std::vector<double>> x;
    std::vector<int> y;
};

Instance random_instance(Rng& rng, std::size_t n, std::size_t dim) {
    Instance inst;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(dim);
        for (auto& v : row) v = rng.uniform() * 2.0 - 1.0;
        inst.x.push_back(row);
        inst.y.push_back(i == 0 ? 1 : i == 1 ? -1 : (rng.below(2) ? 1 : -1));
    }
    return inst;
}

std::vector<double> costs(const Instance& inst, const std::optional<ClassWeights>& w, double c) {
    std::vector<double> out;
    for (int label : inst.y) out.push_back(c * (!w ? 1.0 : label > 0 ? w->relevant : w->irrelevant));
    return out;
}

std::vector<std::size_t> all_rows(std::size_t n) {
    std::vector<std::size_t> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = i;
    return rows;
}

}  // namespace

TEST_CASE("balanced weights") {
    auto w = balanced_weights(5, 5);
    CHECK(w.relevant == doctest::Approx(1.0));
    CHECK(w.irrelevant == doctest::Approx(1.0));
    w = balanced_weights(10, 30);
    CHECK(w.relevant == doctest::Approx(2.0));
    CHECK(w.irrelevant == doctest::Approx(2.0 / 3.0));
    w = balanced_weights(1, 99);
    CHECK(w.relevant == doctest::Approx(50.0));
    CHECK(w.irrelevant == doctest::Approx(50.0 / 99.0));
    CHECK_THROWS(balanced_weights(0, 3));
    CHECK_THROWS(balanced_weights(3, 0));
}

TEST_CASE("decision is a dot product plus bias") {
    const LinearModel m({1.0, 0.0}, 0.0);
    const auto x = FeatureMatrix::from_dense({{2.0, 3.0}});
    CHECK(m.decision(x[0]) == 2.0);
    const LinearModel constant({0.0, 0.0}, -1.0);
    CHECK(constant.decision(x) == std::vector<double>{-1.0});
    const auto rows = std::vector<std::size_t>{0, 0};
    CHECK(m.decision(x, rows) == std::vector<double>{2.0, 2.0});
    const LinearModel wrong({1.0}, 0.0);
    CHECK_THROWS_AS(wrong.decision(x), DimensionError);
}

TEST_CASE("separable pair") {
    const auto x = FeatureMatrix::from_dense({{0.0, 1.0}, {1.0, 0.0}});
    const std::vector<int> y{-1, 1};
    const LinearModel m = train(x, y, std::nullopt, 1);
    CHECK(m.decision(x[0]) < 0);
    CHECK(m.decision(x[1]) > 0);
    CHECK(m.dim() == 2);
}

TEST_CASE("one class is degenerate") {
    const auto x = FeatureMatrix::from_dense({{0.0, 1.0}, {1.0, 0.0}});
    CHECK_THROWS_AS(train(x, std::vector<int>{1, 1}, std::nullopt, 1), DegenerateTrainingError);
    CHECK_THROWS_AS(train(x, std::vector<int>{-1, -1}, std::nullopt, 1), DegenerateTrainingError);
}

TEST_CASE("imbalanced set: weighting raises the positive's score, both optimal") {
    std::vector<std::vector<double>> dense{{0.9, 0.4}};
    std::vector<int> y{1};
    Rng rng(3);
    for (int i = 0; i < 9; ++i) {
        dense.push_back({rng.uniform() * 0.8, 0.3 + rng.uniform() * 0.7});
        y.push_back(-1);
    }
    const auto x = FeatureMatrix::from_dense(dense);
    const auto weights = balanced_weights(1, 9);
    const SolverOptions tight{1.0, 1e-8, 100000};
    const auto plain = train_detailed(x, all_rows(10), y, std::nullopt, 5, tight);
    const auto heavy = train_detailed(x, all_rows(10), y, weights, 5, tight);
    CHECK(heavy.model.decision(x[0]) > plain.model.decision(x[0]));

    const Instance inst{dense, y};
    const auto exact_plain = testing::exact_svm(inst.x, inst.y, costs(inst, std::nullopt, 1.0));
    const auto exact_heavy = testing::exact_svm(inst.x, inst.y, costs(inst, weights, 1.0));
    CHECK(plain.primal == doctest::Approx(exact_plain.objective).epsilon(1e-6));
    CHECK(heavy.primal == doctest::Approx(exact_heavy.objective).epsilon(1e-6));
}

TEST_CASE("objective matches the exact oracle across C and class weights") {
    // large C is ill-conditioned for coordinate descent; allow more epochs
    // than the pinned default here
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.below(5);
        const std::size_t dim = 1 + rng.below(3);
        const Instance inst = random_instance(rng, n, dim);
        const double c = std::pow(10.0, static_cast<double>(rng.below(4)) - 1.0);  // 0.1 .. 100
        std::optional<ClassWeights> w;
        if (rng.below(2)) w = ClassWeights{0.2 + 3 * rng.uniform(), 0.2 + 3 * rng.uniform()};
        SolverOptions options;
        options.c = c;
        options.max_epochs = 100000;
        const auto x = FeatureMatrix::from_dense(inst.x);
        const auto report = train_detailed(x, all_rows(n), inst.y, w, trial, options);
        const auto exact = testing::exact_svm(inst.x, inst.y, costs(inst, w, c));
        CAPTURE(trial);
        CHECK(report.primal >= exact.objective - 1e-9 * (1 + exact.objective));
        CHECK(std::abs(report.primal - exact.objective) <= 1e-3 * exact.objective);
        // the library's own objective agrees with the oracle's evaluation
        CHECK(report.primal == doctest::Approx(testing::svm_objective(report.model.weights(),
                                                                       report.model.bias(), inst.x,
                                                                       inst.y, costs(inst, w, c))));
        // weak duality
        CHECK(report.dual <= report.primal + 1e-9);
    }
}

TEST_CASE("pinned solver settings reach the oracle objective with balanced weights") {
    Rng rng(12);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + rng.below(5);
        const Instance inst = random_instance(rng, n, 1 + rng.below(3));
        const auto positives = static_cast<std::size_t>(std::count(inst.y.begin(), inst.y.end(), 1));
        const auto w = balanced_weights(positives, n - positives);
        const auto report = train_detailed(FeatureMatrix::from_dense(inst.x), all_rows(n), inst.y, w, trial);
        const auto exact = testing::exact_svm(inst.x, inst.y, costs(inst, w, 1.0));
        CAPTURE(trial);
        CHECK(report.converged);
        CHECK(std::abs(report.primal - exact.objective) <= 1e-3 * exact.objective);
    }
}

TEST_CASE("separable problems are fit exactly at large C") {
    Rng rng(21);
    int checked = 0;
    while (checked < 100) {
        const std::size_t n = 2 + rng.below(5);
        const std::size_t dim = 1 + rng.below(3);
        Instance inst = random_instance(rng, n, dim);
        // label by a random plane with a clear margin
        std::vector<double> plane(dim);
        for (auto& v : plane) v = rng.uniform() * 2 - 1;
        bool ok = true;
        bool pos = false;
        bool neg = false;
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.1 * (rng.uniform() - 0.5);
            for (std::size_t k = 0; k < dim; ++k) s += plane[k] * inst.x[i][k];
            if (std::abs(s) < 0.05) ok = false;
            inst.y[i] = s > 0 ? 1 : -1;
            (s > 0 ? pos : neg) = true;
        }
        if (!ok || !pos || !neg) continue;
        ++checked;
        SolverOptions options;
        options.c = 100.0;
        const auto x = FeatureMatrix::from_dense(inst.x);
        const auto m = train(x, inst.y, std::nullopt, checked, options);
        for (std::size_t i = 0; i < n; ++i) CHECK(inst.y[i] * m.decision(x[i]) > 0);
    }
}

TEST_CASE("training margins match the oracle optimum on a separable toy") {
    const std::vector<std::vector<double>> dense{{1, 0}, {0.8, 0.3}, {0, 1}, {0.2, 0.9}};
    const std::vector<int> y{1, 1, -1, -1};
    const auto x = FeatureMatrix::from_dense(dense);
    SolverOptions options{1000.0, 1e-6, 100000};
    const auto m = train(x, y, std::nullopt, 1, options);
    const auto exact = testing::exact_svm(dense, y, std::vector<double>(4, 1000.0));
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(y[i] * m.decision(x[i]) >= 1 - 1e-3);
        double oracle_score = exact.bias;
        for (std::size_t k = 0; k < 2; ++k) oracle_score += exact.weights[k] * dense[i][k];
        CHECK(m.decision(x[i]) == doctest::Approx(oracle_score).epsilon(1e-3));
    }
}

TEST_CASE("same seed, same model; row subsets index the matrix") {
    Rng rng(5);
    const Instance inst = random_instance(rng, 40, 3);
    const auto x = FeatureMatrix::from_dense(inst.x);
    const auto a = train(x, inst.y, std::nullopt, 9);
    const auto b = train(x, inst.y, std::nullopt, 9);
    CHECK(a.weights() == b.weights());
    CHECK(a.bias() == b.bias());

    const std::vector<std::size_t> rows{3, 5, 7, 0, 1};
    std::vector<int> labels;
    std::vector<std::vector<double>> sub;
    for (auto r : rows) {
        labels.push_back(inst.y[r]);
        sub.push_back(inst.x[r]);
    }
    const SolverOptions tight{1.0, 1e-9, 100000};
    const auto on_rows = train_detailed(x, rows, labels, std::nullopt, 2, tight);
    const auto copied = train_detailed(FeatureMatrix::from_dense(sub), all_rows(5), labels, std::nullopt, 2, tight);
    CHECK(on_rows.primal == doctest::Approx(copied.primal).epsilon(1e-9));
}

TEST_CASE("input validation") {
    const auto x = FeatureMatrix::from_dense({{0.0, 1.0}, {1.0, 0.0}});
    const std::vector<std::size_t> rows{0, 5};
    CHECK_THROWS(train(x, rows, std::vector<int>{1, -1}, std::nullopt, 1));
    CHECK_THROWS(train(x, std::vector<int>{1}, std::nullopt, 1));
    CHECK_THROWS(train(x, std::vector<int>{1, 0}, std::nullopt, 1));
}

TEST_CASE("solver reports convergence and a shrinking primal trend") {
    Rng rng(8);
    const Instance inst = random_instance(rng, 300, 3);
    const auto x = FeatureMatrix::from_dense(inst.x);
    SolverOptions options;
    options.record_objective = true;
    const auto report = train_detailed(x, all_rows(300), inst.y, balanced_weights(150, 150), 4, options);
    CHECK(report.converged);
    REQUIRE(!report.primal_by_epoch.empty());
    CHECK(report.primal_by_epoch.back() <= report.primal_by_epoch.front() + 1e-12);
    CHECK(report.dual <= report.primal + 1e-9);
}
