#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace negbias::text {

std::string_view trim(std::string_view s);
std::string lower(std::string_view s);

/// Text after the last occurrence of `marker`, or the whole input if absent.
std::string_view after_last(std::string_view s, std::string_view marker);

/// Value of the first line starting with `label` (e.g. "Statement:"), trimmed.
/// Leading whitespace and markdown emphasis before the label are tolerated.
std::string line_value(std::string_view s, std::string_view label, bool* found);

/// Answer normalization for exact-match comparison: lowercase, punctuation
/// dropped, articles (a/an/the) removed, whitespace collapsed.
std::string normalize_answer(std::string_view s);

/// Leading alphabetic token, lowercased, after skipping non-alphanumerics.
std::string leading_word(std::string_view s);

/// Glob match supporting '*' only.
bool glob_match(std::string_view pattern, std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

}  // namespace negbias::text
