#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fastread::csv {

using Row = std::vector<std::string>;

struct ParseError : std::runtime_error {
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error(what), line(line) {}
    std::size_t line;  // 1-based physical line where the record started
};

/// RFC 4180 records. Quoted fields may hold commas, quotes ("") and line
/// breaks. Accepts CRLF or LF; a leading UTF-8 BOM is skipped. Each record
/// is paired with the 1-based line on which it starts.
struct Record {
    std::size_t line = 0;
    Row fields;
};

std::vector<Record> parse(std::string_view text);

/// Quote only when needed: separators, quotes, CR/LF or edge spaces.
std::string escape(std::string_view field);
std::string format_row(const Row& row);

}  // namespace fastread::csv
