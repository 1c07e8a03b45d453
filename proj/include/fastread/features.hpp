#pragma once

#include "fastread/corpus.hpp"
#include "fastread/stopwords.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace fastread {

inline constexpr std::size_t kDefaultMaxTerms = 4000;

/// Sparse row; indices strictly increasing.
struct SparseVector {
    std::vector<std::uint32_t> index;
    std::vector<double> value;

    std::size_t nnz() const noexcept { return index.size(); }
    double squared_norm() const;
};

/// Lowercased alphanumeric tokens (length >= 2) of title + " " + abstract
/// with stop words removed. Bytes >= 0x80 count as word characters so
/// UTF-8 letters stay inside their token.
std::vector<std::string> tokenize(std::string_view text, const Stoplist& stoplist);
std::vector<std::string> tokenize(const Study& study, const Stoplist& stoplist);

struct VocabularyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Every distinct term of the fitted corpus, sorted lexicographically, with
/// its statistics; the top-scoring max_terms of them are selected as
/// feature columns.
struct Vocabulary {
    std::vector<std::string> terms;
    std::vector<std::size_t> df;
    std::vector<double> idf;    // log(|D| / df) + 1
    std::vector<double> score;  // sum over documents of tf * idf
    std::vector<bool> selected;
    std::size_t documents = 0;

    /// Selected term indices (into terms) in descending score order; the
    /// feature column of selection[k] is k.
    std::vector<std::size_t> selection;

    std::size_t dim() const noexcept { return selection.size(); }
    /// Feature column of a term, or -1 when the term is not selected.
    std::ptrdiff_t column(std::string_view term) const;

    std::unordered_map<std::string, std::uint32_t> column_of;
};

Vocabulary fit(const Corpus& corpus, std::size_t max_terms = kDefaultMaxTerms,
               const Stoplist& stoplist = default_stoplist());

/// Row-per-study tf-idf matrix with unit-length nonzero rows.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(std::vector<SparseVector> rows, std::size_t dim);

    /// Dense rows, for small hand-built problems.
    static FeatureMatrix from_dense(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const noexcept { return rows_.size(); }
    std::size_t dim() const noexcept { return dim_; }
    const SparseVector& row(std::size_t i) const { return rows_.at(i); }
    const SparseVector& operator[](std::size_t i) const { return rows_[i]; }

private:
    std::vector<SparseVector> rows_;
    std::size_t dim_ = 0;
};

FeatureMatrix transform(const Corpus& corpus, const Vocabulary& vocab,
                        const Stoplist& stoplist = default_stoplist());

/// fit + transform.
FeatureMatrix featurize(const Corpus& corpus, std::size_t max_terms = kDefaultMaxTerms);

}  // namespace fastread
