#include "fastread/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iostream>
#include <mutex>
#include <thread>

namespace fastread {

std::size_t recall_target(std::size_t relevant, double target_recall) {
    // the slack keeps 0.95 * 20 from rounding up to 20
    return static_cast<std::size_t>(std::ceil(target_recall * static_cast<double>(relevant) - 1e-9));
}

double wss_at_95(std::size_t x95, std::size_t pool) {
    if (pool == 0) throw std::invalid_argument("WSS@95 needs a nonempty pool");
    if (x95 == 0 || x95 > pool) throw std::invalid_argument("X95 must lie in [1, pool]");
    return 0.95 - static_cast<double>(x95) / static_cast<double>(pool);
}

SimulationResult simulate(const Corpus& corpus, const FeatureMatrix& features,
                          const TreatmentCode& code, const TreatmentConfig& config,
                          std::uint64_t seed, const SimulationOptions& options) {
    config.validate();
    if (features.rows() != corpus.size()) {
        throw std::invalid_argument("feature matrix does not match corpus");
    }
    const std::size_t relevant = corpus.relevant_ids().size();
    if (relevant == 0) throw OracleError("corpus has no relevant studies to find");

    SimulationResult result;
    result.treatment = code;
    result.seed = seed;
    result.corpus = corpus.name();
    result.pool = corpus.size();
    result.relevant = relevant;

    const std::size_t target = recall_target(relevant, config.target_recall);
    ReviewState state(corpus.size(), seed);
    while (state.relevant_count() < target) {
        const Selection selection =
            select_next(code, state, features, config, std::max<std::size_t>(options.batch, 1),
                        options.solver);
        if (options.on_select) options.on_select(selection, state);
        for (auto id : selection.ids) {
            const auto& label = corpus[id].oracle_label;
            if (!label) throw OracleError("study " + std::to_string(id) + " has no oracle label");
            state.record_label(id, *label == Label::relevant ? Code::yes : Code::no);
            result.trajectory.emplace_back(state.labeled_count(), state.relevant_count());
            if (state.relevant_count() >= target) break;
        }
    }

    result.x95 = state.labeled_count();
    result.wss95 = config.target_recall - static_cast<double>(result.x95) / static_cast<double>(result.pool);
    for (auto id : corpus.relevant_ids()) {
        if (!state.is_labeled(id)) result.missed.push_back(id);
    }
    return result;
}

SimulationResult simulate(const Corpus& corpus, const TreatmentCode& code,
                          const TreatmentConfig& config, std::uint64_t seed) {
    return simulate(corpus, featurize(corpus), code, config, seed);
}

std::vector<SimulationResult> repeat(const Corpus& corpus, const FeatureMatrix& features,
                                     const TreatmentCode& code, const TreatmentConfig& config,
                                     std::size_t n, std::uint64_t base_seed,
                                     const SimulationOptions& options, std::size_t jobs) {
    if (n == 0) throw std::invalid_argument("repeat count must be at least 1");
    std::vector<SimulationResult> results(n);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (std::size_t k = next++; k < n; k = next++) {
            try {
                results[k] = simulate(corpus, features, code, config, base_seed + k, options);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };

    jobs = std::clamp<std::size_t>(jobs, 1, n);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    return results;
}

double percentile(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("percentile of an empty sample");
    const double n = static_cast<double>(sorted.size());
    auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

MedianIqr median_iqr(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("median of an empty sample");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    return {percentile(sorted, 50.0), percentile(sorted, 75.0) - percentile(sorted, 25.0)};
}

double cost_saving(const ReviewEffort& effort, const CostModel& model) {
    if (model.abstract_cost < 0.0 || model.fulltext_cost < 0.0) {
        throw std::invalid_argument("review costs must be non-negative");
    }
    const double ca = model.abstract_cost;
    const double cd = model.fulltext_cost;
    const auto reviewed = static_cast<double>(effort.abstracts_reviewed);

    double assisted = 0.0;
    double complete = 0.0;
    if (effort.fulltext_reviewed && effort.fulltext_total) {
        assisted = reviewed * ca + static_cast<double>(*effort.fulltext_reviewed) * cd;
        complete = static_cast<double>(effort.candidates) * ca +
                   static_cast<double>(*effort.fulltext_total) * cd;
    } else {
        assisted = reviewed * (ca + cd);
        complete = (reviewed + static_cast<double>(effort.missed)) * cd +
                   static_cast<double>(effort.candidates) * ca;
    }
    if (complete <= 0.0) {
        std::clog << "warning: total review cost is zero; reporting no saving\n";
        return 0.0;
    }
    return 1.0 - assisted / complete;
}

ReviewEffort effort_of(const SimulationResult& result, const CorpusStats& stats,
                       std::optional<std::size_t> fulltext_reviewed,
                       std::optional<std::size_t> fulltext_total) {
    ReviewEffort effort;
    effort.candidates = stats.candidates;
    effort.abstracts_reviewed = result.x95;
    effort.fulltext_reviewed = fulltext_reviewed;
    effort.fulltext_total = fulltext_total;
    effort.missed = result.missed.size();
    return effort;
}

}  // namespace fastread
