#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fastread {

enum class Label { relevant, irrelevant };

/// Reviewer decision on a study. Starts undetermined.
enum class Code { undetermined, yes, no };

std::string_view to_string(Code code);
/// "yes"/"no" (case-insensitive, trimmed); anything else is nullopt.
std::optional<Label> parse_label(std::string_view text);
Code parse_code(std::string_view text);

struct Study {
    std::size_t id = 0;
    std::string title;
    std::string abstract;
    std::optional<int> year;
    std::string pdf_link;
    std::optional<Label> oracle_label;
    Code code = Code::undetermined;
    /// Values of input columns this library does not interpret, aligned
    /// with Corpus::extra_columns().
    std::vector<std::string> extra;

    bool operator==(const Study&) const = default;
};

class CorpusError : public std::runtime_error {
public:
    enum class Kind { format, empty, row, io };

    CorpusError(Kind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// The candidate pool E. Ids are exactly 0..size()-1 in file order.
class Corpus {
public:
    Corpus() = default;
    Corpus(std::string name, std::vector<Study> studies,
           std::vector<std::string> extra_columns = {});

    const std::string& name() const noexcept { return name_; }
    std::size_t size() const noexcept { return studies_.size(); }
    bool empty() const noexcept { return studies_.empty(); }

    const Study& operator[](std::size_t id) const { return studies_.at(id); }
    const std::vector<Study>& studies() const noexcept { return studies_; }
    const std::vector<std::string>& extra_columns() const noexcept { return extra_columns_; }

    /// True when at least one study carries an oracle label.
    bool simulation_capable() const;
    /// True when every study carries an oracle label.
    bool fully_labeled() const;
    /// Ids of studies whose oracle label is relevant (the set R).
    std::vector<std::size_t> relevant_ids() const;

    /// Copy with reviewer codes replaced. codes.size() must equal size().
    Corpus with_codes(const std::vector<Code>& codes) const;

    /// Non-fatal issues found while loading (unknown labels, bad years).
    std::vector<std::string> warnings;

private:
    std::string name_;
    std::vector<Study> studies_;
    std::vector<std::string> extra_columns_;
};

struct CorpusStats {
    std::size_t candidates = 0;
    std::optional<std::size_t> relevant;
};

namespace columns {
inline constexpr std::string_view title = "Document Title";
inline constexpr std::string_view abstract = "Abstract";
inline constexpr std::string_view year = "Year";
inline constexpr std::string_view pdf_link = "PDF Link";
inline constexpr std::string_view label = "label";
inline constexpr std::string_view code = "code";
}  // namespace columns

Corpus parse_csv(std::string_view text, std::string name = "corpus");
Corpus load_csv(const std::filesystem::path& path);

std::string to_csv(const Corpus& corpus);
void export_csv(const Corpus& corpus, const std::filesystem::path& path);

CorpusStats stats(const Corpus& corpus);

}  // namespace fastread
