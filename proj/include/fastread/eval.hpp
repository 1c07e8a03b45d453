#pragma once

#include "fastread/active.hpp"
#include "fastread/corpus.hpp"
#include "fastread/features.hpp"
#include "fastread/treatment.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fastread {

class OracleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// (studies reviewed |L|, relevant found |L_R|)
using CurvePoint = std::pair<std::size_t, std::size_t>;

struct SimulationResult {
    TreatmentCode treatment = TreatmentCode::linear();
    std::uint64_t seed = 0;
    std::string corpus;
    std::size_t pool = 0;      // |E|
    std::size_t relevant = 0;  // |R|
    std::vector<CurvePoint> trajectory;  // one point per reviewed study
    std::size_t x95 = 0;
    double wss95 = 0.0;
    std::vector<std::size_t> missed;  // relevant ids never reviewed
};

struct SimulationOptions {
    /// Studies queried per retrain. 1 reproduces the one-at-a-time loop.
    std::size_t batch = 1;
    SolverOptions solver;
    /// Called after every selection, before the oracle answers.
    std::function<void(const Selection&, const ReviewState&)> on_select;
};

/// Relevant studies that must be found: ceil(target * relevant).
std::size_t recall_target(std::size_t relevant, double target_recall);

/// 0.95 - x95 / pool.
double wss_at_95(std::size_t x95, std::size_t pool);

/// Runs the review loop against the corpus oracle labels until the recall
/// target is met.
SimulationResult simulate(const Corpus& corpus, const FeatureMatrix& features,
                          const TreatmentCode& code, const TreatmentConfig& config,
                          std::uint64_t seed, const SimulationOptions& options = {});

/// Featurizes with the default vocabulary size, then simulates.
SimulationResult simulate(const Corpus& corpus, const TreatmentCode& code,
                          const TreatmentConfig& config, std::uint64_t seed);

/// n simulations with seeds base_seed .. base_seed + n - 1, ordered by seed.
/// Up to `jobs` run concurrently.
std::vector<SimulationResult> repeat(const Corpus& corpus, const FeatureMatrix& features,
                                     const TreatmentCode& code, const TreatmentConfig& config,
                                     std::size_t n, std::uint64_t base_seed,
                                     const SimulationOptions& options = {},
                                     std::size_t jobs = 1);

struct MedianIqr {
    double median = 0.0;
    double iqr = 0.0;
};

/// Nearest-rank percentile of an ascending-sorted sample, p in [0, 100].
double percentile(std::span<const double> sorted, double p);

/// Median and 75th - 25th percentile, nearest-rank.
MedianIqr median_iqr(std::span<const double> values);

/// Review cost in units of C_A (title/abstract screen) and C_D (additional
/// full-text review).
struct CostModel {
    double abstract_cost = 1.0;
    double fulltext_cost = 9.0;
};

struct ReviewEffort {
    std::size_t candidates = 0;          // |E|
    std::size_t abstracts_reviewed = 0;  // |L| when the review stopped
    /// Full-text reviews done, and the number a complete review would need.
    /// When either is unknown the worst case is assumed: every reviewed study
    /// went to full text, and nothing else would besides the missed ones.
    std::optional<std::size_t> fulltext_reviewed;
    std::optional<std::size_t> fulltext_total;
    std::size_t missed = 0;
};

/// 1 - cost(assisted review) / cost(reviewing every candidate). Returns 0
/// when the full review costs nothing.
double cost_saving(const ReviewEffort& effort, const CostModel& model);

/// Effort of a simulated review on a corpus; full-text counts as above.
ReviewEffort effort_of(const SimulationResult& result, const CorpusStats& stats,
                       std::optional<std::size_t> fulltext_reviewed = std::nullopt,
                       std::optional<std::size_t> fulltext_total = std::nullopt);

}  // namespace fastread
