#pragma once

#include "fastread/features.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace fastread {

/// Per-class multipliers on the hinge loss.
struct ClassWeights {
    double relevant = 1.0;
    double irrelevant = 1.0;
};

/// Inverse class frequency, scaled so that each class carries half of the
/// total weight: weight(class) = n / (2 * n_class).
ClassWeights balanced_weights(std::size_t n_relevant, std::size_t n_irrelevant);

struct SolverOptions {
    double c = 1.0;
    /// Stop once the projected-gradient spread is below this and the
    /// duality gap is below this fraction of the primal objective.
    double tolerance = 1e-3;
    int max_epochs = 1000;
    bool shrinking = true;
    /// Fill TrainingReport::primal_by_epoch (costs one pass per epoch).
    bool record_objective = false;
};

class DegenerateTrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Linear decision plane; positive scores lie on the relevant (+1) side.
class LinearModel {
public:
    LinearModel() = default;
    LinearModel(std::vector<double> weights, double bias)
        : weights_(std::move(weights)), bias_(bias) {}

    std::size_t dim() const noexcept { return weights_.size(); }
    const std::vector<double>& weights() const noexcept { return weights_; }
    double bias() const noexcept { return bias_; }

    double decision(const SparseVector& x) const;
    std::vector<double> decision(const FeatureMatrix& x) const;
    /// Scores of the listed rows, in the given order.
    std::vector<double> decision(const FeatureMatrix& x, std::span<const std::size_t> rows) const;

private:
    std::vector<double> weights_;
    double bias_ = 0.0;
};

struct TrainingReport {
    LinearModel model;
    int epochs = 0;
    bool converged = false;
    double primal = 0.0;
    double dual = 0.0;
    std::vector<double> primal_by_epoch;
};

/// Minimizes 1/2 (|w|^2 + b^2) + C * sum_i c_i * max(0, 1 - y_i (w.x_i + b))
/// by dual coordinate descent. The bias rides along as a constant feature,
/// so it is (lightly) regularized. labels are +1 (relevant) / -1.
/// Throws DegenerateTrainingError unless both classes are present.
TrainingReport train_detailed(const FeatureMatrix& x, std::span<const std::size_t> rows,
                              std::span<const int> labels,
                              const std::optional<ClassWeights>& weights, std::uint64_t seed,
                              const SolverOptions& options = {});

LinearModel train(const FeatureMatrix& x, std::span<const std::size_t> rows,
                  std::span<const int> labels, const std::optional<ClassWeights>& weights,
                  std::uint64_t seed, const SolverOptions& options = {});

/// Trains on every row of x.
LinearModel train(const FeatureMatrix& x, std::span<const int> labels,
                  const std::optional<ClassWeights>& weights, std::uint64_t seed,
                  const SolverOptions& options = {});

double primal_objective(const LinearModel& model, const FeatureMatrix& x,
                        std::span<const std::size_t> rows, std::span<const int> labels,
                        const std::optional<ClassWeights>& weights, double c);

}  // namespace fastread
