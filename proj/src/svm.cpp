#include "fastread/svm.hpp"

#include "fastread/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace fastread {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dot(const std::vector<double>& w, const SparseVector& x) {
    double sum = 0.0;
    for (std::size_t k = 0; k < x.index.size(); ++k) sum += w[x.index[k]] * x.value[k];
    return sum;
}

double class_weight(const std::optional<ClassWeights>& weights, int label) {
    if (!weights) return 1.0;
    return label > 0 ? weights->relevant : weights->irrelevant;
}

void check_inputs(const FeatureMatrix& x, std::span<const std::size_t> rows,
                  std::span<const int> labels) {
    if (rows.size() != labels.size()) {
        throw std::invalid_argument("rows and labels differ in length");
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= x.rows()) throw std::out_of_range("training row out of range");
        if (labels[i] != 1 && labels[i] != -1) throw std::invalid_argument("labels must be +1 or -1");
    }
}

}  // namespace

ClassWeights balanced_weights(std::size_t n_relevant, std::size_t n_irrelevant) {
    if (n_relevant == 0 || n_irrelevant == 0) {
        throw std::invalid_argument("balanced weights need at least one example per class");
    }
    const double n = static_cast<double>(n_relevant + n_irrelevant);
    return {n / (2.0 * static_cast<double>(n_relevant)),
            n / (2.0 * static_cast<double>(n_irrelevant))};
}

double LinearModel::decision(const SparseVector& x) const {
    for (auto j : x.index) {
        if (j >= weights_.size()) throw DimensionError("feature index beyond model dimension");
    }
    return dot(weights_, x) + bias_;
}

std::vector<double> LinearModel::decision(const FeatureMatrix& x) const {
    if (x.dim() != dim()) throw DimensionError("feature dimension does not match model");
    std::vector<double> scores(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) scores[i] = dot(weights_, x[i]) + bias_;
    return scores;
}

std::vector<double> LinearModel::decision(const FeatureMatrix& x,
                                          std::span<const std::size_t> rows) const {
    if (x.dim() != dim()) throw DimensionError("feature dimension does not match model");
    std::vector<double> scores;
    scores.reserve(rows.size());
    for (auto r : rows) scores.push_back(dot(weights_, x.row(r)) + bias_);
    return scores;
}

double primal_objective(const LinearModel& model, const FeatureMatrix& x,
                        std::span<const std::size_t> rows, std::span<const int> labels,
                        const std::optional<ClassWeights>& weights, double c) {
    check_inputs(x, rows, labels);
    double reg = model.bias() * model.bias();
    for (double w : model.weights()) reg += w * w;
    double loss = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double margin = labels[i] * model.decision(x[rows[i]]);
        loss += class_weight(weights, labels[i]) * std::max(0.0, 1.0 - margin);
    }
    return 0.5 * reg + c * loss;
}

// Coordinate descent on the dual
//   min_a 1/2 a'Qa - e'a,  0 <= a_i <= C * c_i,  Q_ij = y_i y_j (x_i.x_j + 1)
// with liblinear-style shrinking. w (and the bias) are kept in sync with a.
TrainingReport train_detailed(const FeatureMatrix& x, std::span<const std::size_t> rows,
                              std::span<const int> labels,
                              const std::optional<ClassWeights>& weights, std::uint64_t seed,
                              const SolverOptions& options) {
    check_inputs(x, rows, labels);
    const bool has_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
    const bool has_neg = std::find(labels.begin(), labels.end(), -1) != labels.end();
    if (!has_pos || !has_neg) {
        throw DegenerateTrainingError("training needs at least one example of each class");
    }
    if (weights && (weights->relevant <= 0.0 || weights->irrelevant <= 0.0)) {
        throw std::invalid_argument("class weights must be positive");
    }

    const std::size_t n = rows.size();
    std::vector<double> w(x.dim(), 0.0);
    double b = 0.0;
    std::vector<double> alpha(n, 0.0);
    std::vector<double> qd(n);
    std::vector<double> upper(n);
    for (std::size_t i = 0; i < n; ++i) {
        qd[i] = x[rows[i]].squared_norm() + 1.0;
        upper[i] = options.c * class_weight(weights, labels[i]);
    }

    std::vector<std::size_t> index(n);
    std::iota(index.begin(), index.end(), 0);
    std::size_t active = n;
    double pg_max_old = kInf;
    double pg_min_old = -kInf;
    Rng rng(seed);

    TrainingReport report;
    auto current_model = [&] { return LinearModel(w, b); };
    auto dual_objective = [&] {
        double norm2 = b * b;
        for (double v : w) norm2 += v * v;
        return std::accumulate(alpha.begin(), alpha.end(), 0.0) - 0.5 * norm2;
    };
    double pg_tolerance = options.tolerance;

    int epoch = 0;
    while (epoch < options.max_epochs) {
        double pg_max_new = -kInf;
        double pg_min_new = kInf;
        rng.shuffle(std::span(index.data(), active));

        for (std::size_t s = 0; s < active; ++s) {
            const std::size_t i = index[s];
            const SparseVector& xi = x[rows[i]];
            const int yi = labels[i];
            const double g = yi * (dot(w, xi) + b) - 1.0;

            double pg = 0.0;
            if (alpha[i] == 0.0) {
                if (options.shrinking && g > pg_max_old) {
                    --active;
                    std::swap(index[s], index[active]);
                    --s;
                    continue;
                }
                if (g < 0.0) pg = g;
            } else if (alpha[i] == upper[i]) {
                if (options.shrinking && g < pg_min_old) {
                    --active;
                    std::swap(index[s], index[active]);
                    --s;
                    continue;
                }
                if (g > 0.0) pg = g;
            } else {
                pg = g;
            }

            pg_max_new = std::max(pg_max_new, pg);
            pg_min_new = std::min(pg_min_new, pg);

            if (std::fabs(pg) > 1e-12) {
                const double old = alpha[i];
                alpha[i] = std::clamp(alpha[i] - g / qd[i], 0.0, upper[i]);
                const double d = (alpha[i] - old) * yi;
                for (std::size_t k = 0; k < xi.index.size(); ++k) w[xi.index[k]] += d * xi.value[k];
                b += d;
            }
        }
        ++epoch;

        if (options.record_objective) {
            report.primal_by_epoch.push_back(
                primal_objective(current_model(), x, rows, labels, weights, options.c));
        }

        if (pg_max_new - pg_min_new <= pg_tolerance) {
            if (active == n) {
                // a small projected gradient does not bound the primal error
                // when C is large; also require the relative duality gap
                const double primal = primal_objective(current_model(), x, rows, labels, weights, options.c);
                if (primal - dual_objective() <= options.tolerance * primal) {
                    report.converged = true;
                    break;
                }
                pg_tolerance *= 0.1;
                pg_max_old = kInf;
                pg_min_old = -kInf;
                continue;
            }
            // re-check the full set before declaring convergence
            active = n;
            pg_max_old = kInf;
            pg_min_old = -kInf;
            continue;
        }
        pg_max_old = pg_max_new <= 0.0 ? kInf : pg_max_new;
        pg_min_old = pg_min_new >= 0.0 ? -kInf : pg_min_new;
    }

    report.model = current_model();
    report.epochs = epoch;
    report.primal = primal_objective(report.model, x, rows, labels, weights, options.c);
    report.dual = dual_objective();
    return report;
}

LinearModel train(const FeatureMatrix& x, std::span<const std::size_t> rows,
                  std::span<const int> labels, const std::optional<ClassWeights>& weights,
                  std::uint64_t seed, const SolverOptions& options) {
    return train_detailed(x, rows, labels, weights, seed, options).model;
}

LinearModel train(const FeatureMatrix& x, std::span<const int> labels,
                  const std::optional<ClassWeights>& weights, std::uint64_t seed,
                  const SolverOptions& options) {
    std::vector<std::size_t> rows(x.rows());
    std::iota(rows.begin(), rows.end(), 0);
    return train(x, rows, labels, weights, seed, options);
}

}  // namespace fastread
