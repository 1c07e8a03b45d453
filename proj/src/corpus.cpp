#include "fastread/corpus.hpp"

#include "fastread/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace fastread {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool iequals(std::string_view a, std::string_view b) {
    return std::equal(a.begin(), a.end(), b.begin(), b.end(), [](char x, char y) {
        return std::tolower(static_cast<unsigned char>(x)) ==
               std::tolower(static_cast<unsigned char>(y));
    });
}

constexpr std::size_t npos = static_cast<std::size_t>(-1);

}  // namespace

std::string_view to_string(Code code) {
    switch (code) {
        case Code::yes: return "yes";
        case Code::no: return "no";
        case Code::undetermined: break;
    }
    return "undetermined";
}

std::optional<Label> parse_label(std::string_view text) {
    text = trim(text);
    if (iequals(text, "yes")) return Label::relevant;
    if (iequals(text, "no")) return Label::irrelevant;
    return std::nullopt;
}

Code parse_code(std::string_view text) {
    const auto label = parse_label(text);
    if (!label) return Code::undetermined;
    return *label == Label::relevant ? Code::yes : Code::no;
}

Corpus::Corpus(std::string name, std::vector<Study> studies, std::vector<std::string> extra_columns)
    : name_(std::move(name)), studies_(std::move(studies)), extra_columns_(std::move(extra_columns)) {
    for (std::size_t i = 0; i < studies_.size(); ++i) {
        studies_[i].id = i;
        studies_[i].extra.resize(extra_columns_.size());
    }
}

bool Corpus::simulation_capable() const {
    return std::any_of(studies_.begin(), studies_.end(),
                       [](const Study& s) { return s.oracle_label.has_value(); });
}

bool Corpus::fully_labeled() const {
    return !studies_.empty() &&
           std::all_of(studies_.begin(), studies_.end(),
                       [](const Study& s) { return s.oracle_label.has_value(); });
}

std::vector<std::size_t> Corpus::relevant_ids() const {
    std::vector<std::size_t> ids;
    for (const auto& s : studies_) {
        if (s.oracle_label == Label::relevant) ids.push_back(s.id);
    }
    return ids;
}

Corpus Corpus::with_codes(const std::vector<Code>& codes) const {
    if (codes.size() != studies_.size()) {
        throw std::invalid_argument("code vector size does not match corpus size");
    }
    Corpus copy = *this;
    for (std::size_t i = 0; i < codes.size(); ++i) copy.studies_[i].code = codes[i];
    return copy;
}

Corpus parse_csv(std::string_view text, std::string name) {
    std::vector<csv::Record> records;
    try {
        records = csv::parse(text);
    } catch (const csv::ParseError& e) {
        throw CorpusError(CorpusError::Kind::row,
                          "malformed CSV at line " + std::to_string(e.line) + ": " + e.what());
    }
    if (records.empty()) {
        throw CorpusError(CorpusError::Kind::format, "missing header row");
    }

    const csv::Row& header = records.front().fields;
    auto find_column = [&](std::string_view wanted) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (trim(header[i]) == wanted) return i;
        }
        return npos;
    };

    const std::size_t title_col = find_column(columns::title);
    const std::size_t abstract_col = find_column(columns::abstract);
    const std::size_t year_col = find_column(columns::year);
    const std::size_t link_col = find_column(columns::pdf_link);
    const std::size_t label_col = find_column(columns::label);
    const std::size_t code_col = find_column(columns::code);

    for (auto [col, column_name] : {std::pair{title_col, columns::title},
                                    std::pair{abstract_col, columns::abstract},
                                    std::pair{year_col, columns::year},
                                    std::pair{link_col, columns::pdf_link}}) {
        if (col == npos) {
            throw CorpusError(CorpusError::Kind::format,
                              "missing required column \"" + std::string(column_name) + "\"");
        }
    }

    std::vector<std::size_t> extra_cols;
    std::vector<std::string> extra_names;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i == title_col || i == abstract_col || i == year_col || i == link_col ||
            i == label_col || i == code_col) {
            continue;
        }
        extra_cols.push_back(i);
        extra_names.emplace_back(trim(header[i]));
    }

    std::vector<Study> studies;
    std::vector<std::string> warnings;
    studies.reserve(records.size() - 1);
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& fields = records[r].fields;
        if (fields.size() != header.size()) {
            std::ostringstream msg;
            msg << "row " << r << " (line " << records[r].line << ") has " << fields.size()
                << " fields, header has " << header.size();
            throw CorpusError(CorpusError::Kind::row, msg.str());
        }

        Study study;
        study.title = fields[title_col];
        study.abstract = fields[abstract_col];
        study.pdf_link = fields[link_col];

        const std::string_view year_text = trim(fields[year_col]);
        if (!year_text.empty()) {
            int year = 0;
            auto [ptr, ec] = std::from_chars(year_text.data(), year_text.data() + year_text.size(), year);
            if (ec == std::errc{} && ptr == year_text.data() + year_text.size()) {
                study.year = year;
            } else {
                warnings.push_back("row " + std::to_string(r) + ": unparseable year \"" +
                                   std::string(year_text) + "\" treated as unknown");
            }
        }

        if (label_col != npos) {
            const std::string_view raw = trim(fields[label_col]);
            study.oracle_label = parse_label(raw);
            if (!raw.empty() && !study.oracle_label) {
                warnings.push_back("row " + std::to_string(r) + ": unknown label \"" +
                                   std::string(raw) + "\" treated as absent");
            }
        }
        if (code_col != npos) study.code = parse_code(fields[code_col]);

        for (std::size_t col : extra_cols) study.extra.push_back(fields[col]);
        studies.push_back(std::move(study));
    }

    if (studies.empty()) {
        throw CorpusError(CorpusError::Kind::empty, "corpus has no data rows");
    }

    Corpus corpus(std::move(name), std::move(studies), std::move(extra_names));
    corpus.warnings = std::move(warnings);
    return corpus;
}

Corpus load_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw CorpusError(CorpusError::Kind::io, "cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_csv(buffer.str(), path.stem().string());
}

std::string to_csv(const Corpus& corpus) {
    const bool with_labels = corpus.simulation_capable();

    csv::Row header{std::string(columns::title), std::string(columns::abstract),
                    std::string(columns::year), std::string(columns::pdf_link)};
    for (const auto& name : corpus.extra_columns()) header.push_back(name);
    if (with_labels) header.emplace_back(columns::label);
    header.emplace_back(columns::code);

    std::string out = csv::format_row(header);
    for (const auto& s : corpus.studies()) {
        csv::Row row{s.title, s.abstract, s.year ? std::to_string(*s.year) : std::string(),
                     s.pdf_link};
        for (const auto& value : s.extra) row.push_back(value);
        if (with_labels) {
            row.emplace_back(!s.oracle_label                        ? ""
                             : *s.oracle_label == Label::relevant ? "yes"
                                                                  : "no");
        }
        row.emplace_back(to_string(s.code));
        out += csv::format_row(row);
    }
    return out;
}

void export_csv(const Corpus& corpus, const std::filesystem::path& path) {
    if (corpus.empty()) {
        throw CorpusError(CorpusError::Kind::empty, "cannot export an empty corpus");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw CorpusError(CorpusError::Kind::io, "cannot write " + path.string());
    }
    out << to_csv(corpus);
    if (!out.flush()) {
        throw CorpusError(CorpusError::Kind::io, "write failed for " + path.string());
    }
}

CorpusStats stats(const Corpus& corpus) {
    CorpusStats result{corpus.size(), std::nullopt};
    if (corpus.simulation_capable()) result.relevant = corpus.relevant_ids().size();
    return result;
}

}  // namespace fastread
