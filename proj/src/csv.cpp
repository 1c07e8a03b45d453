#include "fastread/csv.hpp"

namespace fastread::csv {

std::vector<Record> parse(std::string_view text) {
    if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

    std::vector<Record> records;
    Record current;
    std::string field;
    std::size_t line = 1;
    current.line = 1;
    bool in_quotes = false;
    bool after_quote = false;  // closing quote seen, expecting separator
    bool record_open = false;  // any character consumed for this record

    auto end_field = [&] {
        current.fields.push_back(std::move(field));
        field.clear();
        after_quote = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(current));
        current = Record{};
        record_open = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                    after_quote = true;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }

        if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') continue;
        if (c == '\n' || c == '\r') {
            if (record_open) end_record();
            ++line;
            current.line = line;
            continue;
        }
        if (!record_open) {
            record_open = true;
            current.line = line;
        }
        if (c == ',') {
            end_field();
        } else if (after_quote) {
            throw ParseError(current.line, "unexpected character after closing quote");
        } else if (c == '"' && field.empty()) {
            in_quotes = true;
        } else {
            field.push_back(c);
        }
    }
    if (in_quotes) throw ParseError(current.line, "unterminated quoted field");
    if (record_open) end_record();
    return records;
}

std::string escape(std::string_view field) {
    const bool needs_quotes =
        field.find_first_of(",\"\r\n") != std::string_view::npos ||
        (!field.empty() && (field.front() == ' ' || field.back() == ' '));
    if (!needs_quotes) return std::string(field);

    std::string out;
    out.reserve(field.size() + 2);
    out.push_back('"');
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string format_row(const Row& row) {
    std::string out;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i > 0) out.push_back(',');
        out += escape(row[i]);
    }
    out += "\r\n";
    return out;
}

}  // namespace fastread::csv
