#pragma once

#include "fastread/corpus.hpp"
#include "fastread/features.hpp"
#include "fastread/rng.hpp"
#include "fastread/svm.hpp"
#include "fastread/treatment.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace fastread {

enum class QueryPhase { random, uncertainty, certainty };

std::string_view to_string(QueryPhase phase);

class LabelError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class ExhaustedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Partition of the pool into reviewed (L = L_R + L_I) and unreviewed
/// studies, plus the current model and the sampling generator.
class ReviewState {
public:
    ReviewState(std::size_t pool_size, std::uint64_t seed);

    std::size_t pool_size() const noexcept { return codes_.size(); }
    std::uint64_t seed() const noexcept { return seed_; }

    /// Moves id from the unreviewed set into L_R (yes) or L_I (no).
    void record_label(std::size_t id, Code code);
    /// Changes the code of an already reviewed study.
    void recode(std::size_t id, Code code);

    bool is_labeled(std::size_t id) const { return codes_.at(id) != Code::undetermined; }
    Code code(std::size_t id) const { return codes_.at(id); }
    const std::vector<Code>& codes() const noexcept { return codes_; }

    std::size_t labeled_count() const noexcept { return relevant_ + irrelevant_; }
    std::size_t relevant_count() const noexcept { return relevant_; }
    std::size_t irrelevant_count() const noexcept { return irrelevant_; }

    /// Unreviewed ids, ascending.
    const std::vector<std::size_t>& unlabeled() const noexcept { return unlabeled_; }
    std::vector<std::size_t> labeled_ids() const;
    std::vector<std::size_t> relevant_ids() const;
    std::vector<std::size_t> irrelevant_ids() const;

    const std::optional<LinearModel>& model() const noexcept { return model_; }
    void set_model(LinearModel model) { model_ = std::move(model); }
    void clear_model() { model_.reset(); }

    Rng& rng() noexcept { return rng_; }
    void reseed(std::uint64_t seed) { rng_ = Rng(seed); }

private:
    std::vector<Code> codes_;
    std::vector<std::size_t> unlabeled_;
    std::size_t relevant_ = 0;
    std::size_t irrelevant_ = 0;
    std::optional<LinearModel> model_;
    std::uint64_t seed_;
    Rng rng_;
};

/// True while fewer than t2 relevant studies have been found.
bool not_stable(const ReviewState& state, const TreatmentConfig& config);

/// S-codes freeze the model once stable; T-codes always retrain.
bool should_retrain(const TreatmentCode& code, const ReviewState& state,
                    const TreatmentConfig& config);

/// The query branch the next selection takes.
QueryPhase phase(const TreatmentCode& code, const ReviewState& state,
                 const TreatmentConfig& config);

struct TrainStepReport {
    std::size_t training_examples = 0;
    bool undersampled = false;
    bool weighted = false;
};

/// Trains on the reviewed studies according to the balance letter.
LinearModel train_step(const TreatmentCode& code, const ReviewState& state,
                       const FeatureMatrix& features, const TreatmentConfig& config,
                       std::uint64_t seed, const SolverOptions& solver = {},
                       TrainStepReport* report = nullptr);

/// Next min(batch, |unreviewed|) ids. Random phase draws from state's
/// generator; otherwise ranks by the state's model. Ties go to the lower id.
std::vector<std::size_t> query_next(const TreatmentCode& code, ReviewState& state,
                                    const FeatureMatrix& features,
                                    const TreatmentConfig& config, std::size_t batch);

struct Selection {
    std::vector<std::size_t> ids;
    QueryPhase phase = QueryPhase::random;
    std::optional<TrainStepReport> training;  // set when a model was (re)trained
};

/// One round of the review loop: retrain when due, then query.
Selection select_next(const TreatmentCode& code, ReviewState& state,
                      const FeatureMatrix& features, const TreatmentConfig& config,
                      std::size_t batch, const SolverOptions& solver = {});

}  // namespace fastread
