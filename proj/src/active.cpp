#include "fastread/active.hpp"

#include <algorithm>
#include <cmath>

namespace fastread {

std::string_view to_string(QueryPhase phase) {
    switch (phase) {
        case QueryPhase::random: return "random";
        case QueryPhase::uncertainty: return "uncertainty";
        case QueryPhase::certainty: return "certainty";
    }
    return "random";
}

ReviewState::ReviewState(std::size_t pool_size, std::uint64_t seed)
    : codes_(pool_size, Code::undetermined), unlabeled_(pool_size), seed_(seed), rng_(seed) {
    for (std::size_t i = 0; i < pool_size; ++i) unlabeled_[i] = i;
}

void ReviewState::record_label(std::size_t id, Code code) {
    if (id >= codes_.size()) throw LabelError("study id " + std::to_string(id) + " is not in the pool");
    if (code == Code::undetermined) throw LabelError("a review decision must be yes or no");
    if (codes_[id] != Code::undetermined) {
        throw LabelError("study " + std::to_string(id) + " is already labeled");
    }
    codes_[id] = code;
    (code == Code::yes ? relevant_ : irrelevant_) += 1;
    unlabeled_.erase(std::lower_bound(unlabeled_.begin(), unlabeled_.end(), id));
}

void ReviewState::recode(std::size_t id, Code code) {
    if (id >= codes_.size()) throw LabelError("study id " + std::to_string(id) + " is not in the pool");
    if (code == Code::undetermined) throw LabelError("a review decision must be yes or no");
    if (codes_[id] == Code::undetermined) {
        throw LabelError("study " + std::to_string(id) + " has not been labeled yet");
    }
    if (codes_[id] == code) return;
    (codes_[id] == Code::yes ? relevant_ : irrelevant_) -= 1;
    (code == Code::yes ? relevant_ : irrelevant_) += 1;
    codes_[id] = code;
}

namespace {

std::vector<std::size_t> ids_with(const std::vector<Code>& codes, bool (*keep)(Code)) {
    std::vector<std::size_t> ids;
    for (std::size_t i = 0; i < codes.size(); ++i) {
        if (keep(codes[i])) ids.push_back(i);
    }
    return ids;
}

struct Ranked {
    double key;
    std::size_t id;
    bool operator<(const Ranked& other) const {
        return key < other.key || (key == other.key && id < other.id);
    }
};

// The `count` smallest keys, ascending.
std::vector<std::size_t> smallest(std::vector<Ranked> ranked, std::size_t count) {
    count = std::min(count, ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(count), ranked.end());
    std::vector<std::size_t> ids;
    ids.reserve(count);
    for (std::size_t k = 0; k < count; ++k) ids.push_back(ranked[k].id);
    return ids;
}

}  // namespace

std::vector<std::size_t> ReviewState::labeled_ids() const {
    return ids_with(codes_, [](Code c) { return c != Code::undetermined; });
}

std::vector<std::size_t> ReviewState::relevant_ids() const {
    return ids_with(codes_, [](Code c) { return c == Code::yes; });
}

std::vector<std::size_t> ReviewState::irrelevant_ids() const {
    return ids_with(codes_, [](Code c) { return c == Code::no; });
}

bool not_stable(const ReviewState& state, const TreatmentConfig& config) {
    return state.relevant_count() < config.t2;
}

bool should_retrain(const TreatmentCode& code, const ReviewState& state,
                    const TreatmentConfig& config) {
    if (code.is_linear()) return false;
    return code.stop() == StopRule::keep_training || not_stable(state, config);
}

QueryPhase phase(const TreatmentCode& code, const ReviewState& state,
                 const TreatmentConfig& config) {
    if (code.is_linear() || state.relevant_count() < enough(code, config)) return QueryPhase::random;
    // both classes are needed before a first model can exist
    if (!state.model() && state.irrelevant_count() == 0) return QueryPhase::random;
    if (code.query() == QueryRule::uncertainty && not_stable(state, config)) {
        return QueryPhase::uncertainty;
    }
    return QueryPhase::certainty;
}

LinearModel train_step(const TreatmentCode& code, const ReviewState& state,
                       const FeatureMatrix& features, const TreatmentConfig& config,
                       std::uint64_t seed, const SolverOptions& solver, TrainStepReport* report) {
    if (code.is_linear()) throw std::logic_error("the linear baseline has no learner");
    if (state.pool_size() != features.rows()) {
        throw DimensionError("feature matrix rows do not match the review pool");
    }
    const auto rows = state.labeled_ids();
    std::vector<int> labels;
    labels.reserve(rows.size());
    for (auto id : rows) labels.push_back(state.code(id) == Code::yes ? 1 : -1);

    std::optional<ClassWeights> weights;
    if (code.weighted() && state.relevant_count() > 0 && state.irrelevant_count() > 0) {
        weights = balanced_weights(state.relevant_count(), state.irrelevant_count());
    }
    LinearModel model = train(features, rows, labels, weights, seed, solver);

    TrainStepReport local{rows.size(), false, weights.has_value()};
    if (code.undersamples() && !not_stable(state, config)) {
        // Keep the irrelevant studies furthest on the irrelevant side of the
        // plane, as many as there are relevant ones, and retrain unweighted.
        const auto irrelevant = state.irrelevant_ids();
        const auto scores = model.decision(features, irrelevant);
        std::vector<Ranked> ranked;
        ranked.reserve(irrelevant.size());
        for (std::size_t k = 0; k < irrelevant.size(); ++k) ranked.push_back({scores[k], irrelevant[k]});
        auto kept = smallest(std::move(ranked), state.relevant_count());

        auto subset = state.relevant_ids();
        subset.insert(subset.end(), kept.begin(), kept.end());
        std::sort(subset.begin(), subset.end());
        std::vector<int> subset_labels;
        subset_labels.reserve(subset.size());
        for (auto id : subset) subset_labels.push_back(state.code(id) == Code::yes ? 1 : -1);

        model = train(features, subset, subset_labels, std::nullopt, mix_seed(seed, 1), solver);
        local = {subset.size(), true, false};
    }
    if (report) *report = local;
    return model;
}

std::vector<std::size_t> query_next(const TreatmentCode& code, ReviewState& state,
                                    const FeatureMatrix& features,
                                    const TreatmentConfig& config, std::size_t batch) {
    const auto& pool = state.unlabeled();
    if (pool.empty()) throw ExhaustedError("every study has been reviewed");
    const std::size_t count = std::min(batch, pool.size());

    const QueryPhase current = phase(code, state, config);
    if (current == QueryPhase::random) {
        std::vector<std::size_t> ids;
        ids.reserve(count);
        if (count == 1) {
            ids.push_back(pool[state.rng().below(pool.size())]);
            return ids;
        }
        std::vector<std::size_t> remaining = pool;
        for (std::size_t k = 0; k < count; ++k) {
            const std::size_t pick = k + state.rng().below(remaining.size() - k);
            std::swap(remaining[k], remaining[pick]);
            ids.push_back(remaining[k]);
        }
        return ids;
    }

    if (!state.model()) throw std::logic_error("query needs a trained model");
    const auto scores = state.model()->decision(features, pool);
    std::vector<Ranked> ranked;
    ranked.reserve(pool.size());
    for (std::size_t k = 0; k < pool.size(); ++k) {
        // uncertainty: closest to the plane; certainty: furthest on the relevant side
        const double key = current == QueryPhase::uncertainty ? std::fabs(scores[k]) : -scores[k];
        ranked.push_back({key, pool[k]});
    }
    return smallest(std::move(ranked), count);
}

Selection select_next(const TreatmentCode& code, ReviewState& state,
                      const FeatureMatrix& features, const TreatmentConfig& config,
                      std::size_t batch, const SolverOptions& solver) {
    Selection selection;
    if (!code.is_linear() && state.relevant_count() >= enough(code, config)) {
        const bool trainable = state.relevant_count() > 0 && state.irrelevant_count() > 0;
        if (trainable && (!state.model() || should_retrain(code, state, config))) {
            TrainStepReport report;
            state.set_model(train_step(code, state, features, config,
                                       mix_seed(state.seed(), state.labeled_count()), solver,
                                       &report));
            selection.training = report;
        }
    }
    selection.phase = phase(code, state, config);
    selection.ids = query_next(code, state, features, config, batch);
    return selection;
}

}  // namespace fastread
