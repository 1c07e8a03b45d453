#pragma once

#include <array>
#include <span>
#include <string_view>
#include <unordered_set>

namespace fastread {

using Stoplist = std::unordered_set<std::string_view>;

/// Identifier of the embedded list; printed with it by the CLI.
std::string_view stoplist_version();
std::span<const std::string_view> english_stopwords();
const Stoplist& default_stoplist();

}  // namespace fastread
