#include "fastread/active.hpp"
#include "fastread/treatment.hpp"

#include "support/synthetic.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace fastread;

namespace {

TreatmentCode code(const char* text) { return *TreatmentCode::parse(text); }

// Pool whose rows score -0.5, 0.1, 2.0 under w = (1), b = 0; ids 3 and 4
// are one reviewed relevant and one reviewed irrelevant study.
struct ScoredPool {
    FeatureMatrix x = FeatureMatrix::from_dense({{-0.5}, {0.1}, {2.0}, {1.0}, {-1.0}});
    ReviewState state{5, 1};

    ScoredPool() {
        state.record_label(3, Code::yes);
        state.record_label(4, Code::no);
        state.set_model(LinearModel({1.0}, 0.0));
    }
};

// Labeled state with the given counts over a generated corpus.
ReviewState labeled_state(const Corpus& corpus, std::size_t relevant, std::size_t irrelevant) {
    ReviewState state(corpus.size(), 3);
    for (const auto& s : corpus.studies()) {
        if (s.oracle_label == Label::relevant && relevant > 0) {
            state.record_label(s.id, Code::yes);
            --relevant;
        } else if (s.oracle_label == Label::irrelevant && irrelevant > 0) {
            state.record_label(s.id, Code::no);
            --irrelevant;
        }
    }
    REQUIRE(relevant == 0);
    REQUIRE(irrelevant == 0);
    return state;
}

}  // namespace

TEST_CASE("32 treatments plus linear, each round-tripping") {
    const auto all = TreatmentCode::all();
    REQUIRE(all.size() == 33);
    std::set<std::string> names;
    for (const auto& c : all) {
        names.insert(c.to_string());
        CHECK(TreatmentCode::parse(c.to_string()) == c);
    }
    CHECK(names.size() == 33);
    CHECK(all.back().is_linear());
    CHECK(std::count_if(all.begin(), all.end(), [](const auto& c) { return !c.is_linear(); }) == 32);
    CHECK(TreatmentCode::parse("hutm") == TreatmentCode::fastread());
    CHECK(TreatmentCode::parse("LINEAR") == TreatmentCode::linear());
    CHECK_FALSE(TreatmentCode::parse("HUT").has_value());
    CHECK_FALSE(TreatmentCode::parse("XUTM").has_value());
    CHECK_FALSE(TreatmentCode::parse("HUTMX").has_value());
    CHECK(code("HUTM").weighted());
    CHECK(code("HUTM").undersamples());
    CHECK_FALSE(code("PUSA").weighted());
    CHECK(code("PUSA").undersamples());
    CHECK(code("PCTW").weighted());
    CHECK_FALSE(code("HCTN").undersamples());
    CHECK_FALSE(TreatmentCode::linear().weighted());
}

TEST_CASE("enough") {
    const TreatmentConfig config;
    CHECK(enough(code("PUSA"), config) == 5);
    CHECK(enough(code("HUTM"), config) == 1);
    CHECK(enough(TreatmentCode::linear(), config) == kNever);
}

TEST_CASE("config validation") {
    TreatmentConfig config;
    CHECK_NOTHROW(config.validate());
    config.t1 = 0;
    CHECK_THROWS(config.validate());
    config = {};
    config.target_recall = 0.0;
    CHECK_THROWS(config.validate());
    config = {};
    config.t1 = 40;
    CHECK_THROWS(config.validate());
}

TEST_CASE("stability and retraining") {
    const TreatmentConfig config;
    ReviewState state(100, 1);
    CHECK(not_stable(state, config));
    for (std::size_t i = 0; i < 29; ++i) state.record_label(i, Code::yes);
    CHECK(not_stable(state, config));
    CHECK(should_retrain(code("PUSA"), state, config));
    state.record_label(29, Code::yes);
    CHECK_FALSE(not_stable(state, config));
    state.record_label(30, Code::yes);
    CHECK_FALSE(should_retrain(code("PUSA"), state, config));
    CHECK(should_retrain(code("HCTN"), state, config));

    ReviewState early(10, 1);
    early.record_label(0, Code::yes);
    early.record_label(1, Code::yes);
    for (const auto& c : TreatmentCode::all()) {
        if (!c.is_linear()) CHECK(should_retrain(c, early, config));
    }
}

TEST_CASE("recording labels") {
    ReviewState state(10, 1);
    state.record_label(7, Code::yes);
    CHECK(state.relevant_count() == 1);
    CHECK(std::find(state.unlabeled().begin(), state.unlabeled().end(), 7) == state.unlabeled().end());
    state.record_label(3, Code::no);
    CHECK(state.irrelevant_count() == 1);
    CHECK(state.unlabeled().size() == 8);
    CHECK_THROWS_AS(state.record_label(7, Code::yes), LabelError);
    CHECK_THROWS_AS(state.record_label(11, Code::yes), LabelError);
    CHECK_THROWS_AS(state.record_label(1, Code::undetermined), LabelError);
    CHECK(state.labeled_ids() == std::vector<std::size_t>{3, 7});
    state.recode(7, Code::no);
    CHECK(state.relevant_count() == 0);
    CHECK(state.irrelevant_count() == 2);
    CHECK_THROWS_AS(state.recode(1, Code::no), LabelError);
    CHECK(std::is_sorted(state.unlabeled().begin(), state.unlabeled().end()));
}

TEST_CASE("uncertainty takes the smallest |score|, certainty the largest score") {
    const TreatmentConfig config;
    ScoredPool u;
    CHECK(phase(code("HUTM"), u.state, config) == QueryPhase::uncertainty);
    CHECK(query_next(code("HUTM"), u.state, u.x, config, 1) == std::vector<std::size_t>{1});
    CHECK(query_next(code("HUTM"), u.state, u.x, config, 3) == std::vector<std::size_t>{1, 0, 2});

    ScoredPool c;
    CHECK(phase(code("HCTM"), c.state, config) == QueryPhase::certainty);
    CHECK(query_next(code("HCTM"), c.state, c.x, config, 1) == std::vector<std::size_t>{2});
    CHECK(query_next(code("HCTM"), c.state, c.x, config, 3) == std::vector<std::size_t>{2, 1, 0});
}

TEST_CASE("ties go to the lower id") {
    const TreatmentConfig config;
    const auto x = FeatureMatrix::from_dense({{0.5}, {0.5}, {-0.5}, {0.5}});
    ReviewState state(4, 1);
    state.record_label(3, Code::yes);
    state.set_model(LinearModel({1.0}, 0.0));
    CHECK(query_next(code("HUTM"), state, x, config, 3) == std::vector<std::size_t>{0, 1, 2});
    CHECK(query_next(code("HCTM"), state, x, config, 3) == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("batch larger than the pool, and an empty pool") {
    const TreatmentConfig config;
    ReviewState state(4, 1);
    const auto x = FeatureMatrix::from_dense({{1}, {2}, {3}, {4}});
    const auto ids = query_next(TreatmentCode::linear(), state, x, config, 10);
    CHECK(ids.size() == 4);
    CHECK(std::set<std::size_t>(ids.begin(), ids.end()).size() == 4);
    for (auto id : ids) state.record_label(id, Code::no);
    CHECK_THROWS_AS(query_next(TreatmentCode::linear(), state, x, config, 1), ExhaustedError);
}

TEST_CASE("random phase before enough relevant studies") {
    const TreatmentConfig config;
    ReviewState state(20, 1);
    for (std::size_t i = 0; i < 4; ++i) state.record_label(i, Code::yes);
    state.record_label(5, Code::no);
    CHECK(phase(code("PUSA"), state, config) == QueryPhase::random);
    state.record_label(4, Code::yes);
    CHECK(phase(code("PUSA"), state, config) == QueryPhase::uncertainty);
    CHECK(phase(TreatmentCode::linear(), state, config) == QueryPhase::random);
}

TEST_CASE("random sampling draws without replacement from the state's generator") {
    const TreatmentConfig config;
    const auto x = FeatureMatrix::from_dense(std::vector<std::vector<double>>(50, {1.0}));
    ReviewState a(50, 42);
    ReviewState b(50, 42);
    const auto first = query_next(TreatmentCode::linear(), a, x, config, 10);
    CHECK(first == query_next(TreatmentCode::linear(), b, x, config, 10));
    CHECK(std::set<std::size_t>(first.begin(), first.end()).size() == 10);
    ReviewState c(50, 43);
    CHECK(first != query_next(TreatmentCode::linear(), c, x, config, 10));
}

TEST_CASE("training sets by balance letter") {
    testing::SyntheticSpec spec;
    spec.documents = 400;
    spec.relevant = 40;
    const Corpus corpus = testing::synthetic_corpus(spec);
    const FeatureMatrix x = featurize(corpus);
    const TreatmentConfig config;

    SUBCASE("mixed, not stable: weighted on all of L") {
        const auto state = labeled_state(corpus, 3, 20);
        TrainStepReport report;
        train_step(code("HUTM"), state, x, config, 1, {}, &report);
        CHECK(report.training_examples == 23);
        CHECK(report.weighted);
        CHECK_FALSE(report.undersampled);
    }
    SUBCASE("mixed, stable: relevant plus as many lowest-scoring irrelevant") {
        const auto state = labeled_state(corpus, 30, 100);
        TrainStepReport report;
        const LinearModel model = train_step(code("HUTM"), state, x, config, 9, {}, &report);
        CHECK(report.training_examples == 60);
        CHECK(report.undersampled);
        CHECK_FALSE(report.weighted);

        // rebuild the expected model from the description
        std::vector<std::size_t> rows = state.labeled_ids();
        std::vector<int> labels;
        for (auto id : rows) labels.push_back(state.code(id) == Code::yes ? 1 : -1);
        const LinearModel interim = train(x, rows, labels, balanced_weights(30, 100), 9);
        auto irrelevant = state.irrelevant_ids();
        std::stable_sort(irrelevant.begin(), irrelevant.end(), [&](std::size_t a, std::size_t b) {
            return interim.decision(x[a]) < interim.decision(x[b]);
        });
        std::vector<std::size_t> subset = state.relevant_ids();
        subset.insert(subset.end(), irrelevant.begin(), irrelevant.begin() + 30);
        std::sort(subset.begin(), subset.end());
        std::vector<int> subset_labels;
        for (auto id : subset) subset_labels.push_back(state.code(id) == Code::yes ? 1 : -1);
        const LinearModel expected = train(x, subset, subset_labels, std::nullopt, mix_seed(9, 1));
        CHECK(model.weights() == expected.weights());
        CHECK(model.bias() == expected.bias());
    }
    SUBCASE("aggressive, stable, fewer irrelevant than relevant") {
        const auto state = labeled_state(corpus, 35, 10);
        TrainStepReport report;
        train_step(code("PUTA"), state, x, config, 1, {}, &report);
        CHECK(report.training_examples == 45);
        CHECK(report.undersampled);
    }
    SUBCASE("none: unweighted on all of L whatever the state") {
        for (auto [r, i] : {std::pair{3, 20}, std::pair{35, 200}}) {
            const auto state = labeled_state(corpus, r, i);
            TrainStepReport report;
            train_step(code("HCTN"), state, x, config, 1, {}, &report);
            CHECK(report.training_examples == r + i);
            CHECK_FALSE(report.weighted);
            CHECK_FALSE(report.undersampled);
        }
    }
    SUBCASE("weighting stays weighted once stable") {
        const auto state = labeled_state(corpus, 32, 50);
        TrainStepReport report;
        train_step(code("PCTW"), state, x, config, 1, {}, &report);
        CHECK(report.training_examples == 82);
        CHECK(report.weighted);
        CHECK_FALSE(report.undersampled);
    }
    SUBCASE("the linear baseline has no learner") {
        const auto state = labeled_state(corpus, 3, 3);
        CHECK_THROWS(train_step(TreatmentCode::linear(), state, x, config, 1));
    }
}

TEST_CASE("S-codes freeze the model once stable") {
    testing::SyntheticSpec spec;
    spec.documents = 300;
    spec.relevant = 40;
    const Corpus corpus = testing::synthetic_corpus(spec);
    const FeatureMatrix x = featurize(corpus);
    const TreatmentConfig config;
    auto state = labeled_state(corpus, 31, 40);
    auto s = select_next(code("HUSN"), state, x, config, 1);
    REQUIRE(s.training.has_value());  // first model ever
    const auto frozen = *state.model();
    state.record_label(s.ids[0], corpus[s.ids[0]].oracle_label == Label::relevant ? Code::yes : Code::no);
    s = select_next(code("HUSN"), state, x, config, 1);
    CHECK_FALSE(s.training.has_value());
    CHECK(state.model()->weights() == frozen.weights());
    CHECK(s.phase == QueryPhase::certainty);
}
