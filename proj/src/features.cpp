#include "fastread/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace fastread {

namespace {

bool is_word_byte(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

char lower(unsigned char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
}

std::string document_text(const Study& study) { return study.title + " " + study.abstract; }

// term -> count for one document
std::map<std::string, std::size_t> term_counts(const Study& study, const Stoplist& stoplist) {
    std::map<std::string, std::size_t> counts;
    for (auto& token : tokenize(study, stoplist)) ++counts[std::move(token)];
    return counts;
}

}  // namespace

double SparseVector::squared_norm() const {
    double sum = 0.0;
    for (double v : value) sum += v * v;
    return sum;
}

std::vector<std::string> tokenize(std::string_view text, const Stoplist& stoplist) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (current.size() >= 2 && !stoplist.contains(current)) tokens.push_back(current);
        current.clear();
    };
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (is_word_byte(c)) {
            current.push_back(lower(c));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

std::vector<std::string> tokenize(const Study& study, const Stoplist& stoplist) {
    return tokenize(document_text(study), stoplist);
}

std::ptrdiff_t Vocabulary::column(std::string_view term) const {
    auto it = column_of.find(std::string(term));
    return it == column_of.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

Vocabulary fit(const Corpus& corpus, std::size_t max_terms, const Stoplist& stoplist) {
    if (corpus.empty()) throw VocabularyError("cannot fit a vocabulary on an empty corpus");

    // term -> (collection frequency, document frequency); std::map keeps
    // terms lexicographic.
    std::map<std::string, std::pair<std::size_t, std::size_t>> totals;
    for (const auto& study : corpus.studies()) {
        for (auto& [term, count] : term_counts(study, stoplist)) {
            auto& entry = totals[term];
            entry.first += count;
            entry.second += 1;
        }
    }
    if (totals.empty()) throw VocabularyError("corpus contains no tokens after stop-word removal");

    Vocabulary vocab;
    vocab.documents = corpus.size();
    const double n_docs = static_cast<double>(corpus.size());
    for (auto& [term, freq] : totals) {
        const double idf = std::log(n_docs / static_cast<double>(freq.second)) + 1.0;
        vocab.terms.push_back(term);
        vocab.df.push_back(freq.second);
        vocab.idf.push_back(idf);
        // tf summed over documents times the per-term idf
        vocab.score.push_back(static_cast<double>(freq.first) * idf);
    }

    std::vector<std::size_t> order(vocab.terms.size());
    std::iota(order.begin(), order.end(), 0);
    // terms are already lexicographic, so index order breaks score ties
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vocab.score[a] > vocab.score[b]; });
    order.resize(std::min(max_terms, order.size()));

    vocab.selected.assign(vocab.terms.size(), false);
    vocab.selection = order;
    for (std::size_t col = 0; col < order.size(); ++col) {
        vocab.selected[order[col]] = true;
        vocab.column_of.emplace(vocab.terms[order[col]], static_cast<std::uint32_t>(col));
    }
    return vocab;
}

FeatureMatrix::FeatureMatrix(std::vector<SparseVector> rows, std::size_t dim)
    : rows_(std::move(rows)), dim_(dim) {
    for (const auto& r : rows_) {
        if (r.index.size() != r.value.size()) {
            throw std::invalid_argument("sparse row index/value size mismatch");
        }
        for (std::size_t k = 0; k < r.index.size(); ++k) {
            if (r.index[k] >= dim_ || (k > 0 && r.index[k] <= r.index[k - 1])) {
                throw std::invalid_argument("sparse row indices must be increasing and < dim");
            }
        }
    }
}

FeatureMatrix FeatureMatrix::from_dense(const std::vector<std::vector<double>>& rows) {
    const std::size_t dim = rows.empty() ? 0 : rows.front().size();
    std::vector<SparseVector> sparse;
    sparse.reserve(rows.size());
    for (const auto& dense : rows) {
        if (dense.size() != dim) throw std::invalid_argument("ragged dense rows");
        SparseVector r;
        for (std::size_t j = 0; j < dense.size(); ++j) {
            if (dense[j] != 0.0) {
                r.index.push_back(static_cast<std::uint32_t>(j));
                r.value.push_back(dense[j]);
            }
        }
        sparse.push_back(std::move(r));
    }
    return FeatureMatrix(std::move(sparse), dim);
}

FeatureMatrix transform(const Corpus& corpus, const Vocabulary& vocab, const Stoplist& stoplist) {
    std::vector<SparseVector> rows;
    rows.reserve(corpus.size());
    for (const auto& study : corpus.studies()) {
        std::vector<std::pair<std::uint32_t, double>> cells;
        for (const auto& [term, count] : term_counts(study, stoplist)) {
            auto it = vocab.column_of.find(term);
            if (it == vocab.column_of.end()) continue;
            const double idf = vocab.idf[vocab.selection[it->second]];
            cells.emplace_back(it->second, static_cast<double>(count) * idf);
        }
        std::sort(cells.begin(), cells.end());

        SparseVector row;
        double norm = 0.0;
        for (const auto& [col, v] : cells) norm += v * v;
        norm = std::sqrt(norm);
        for (const auto& [col, v] : cells) {
            row.index.push_back(col);
            row.value.push_back(v / norm);
        }
        rows.push_back(std::move(row));
    }
    return FeatureMatrix(std::move(rows), vocab.dim());
}

FeatureMatrix featurize(const Corpus& corpus, std::size_t max_terms) {
    return transform(corpus, fit(corpus, max_terms));
}

}  // namespace fastread
