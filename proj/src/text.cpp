#include "negbias/text.hpp"

#include <cctype>

namespace negbias::text {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view after_last(std::string_view s, std::string_view marker) {
  const auto pos = s.rfind(marker);
  if (pos == std::string_view::npos) return s;
  return s.substr(pos + marker.size());
}

std::string line_value(std::string_view s, std::string_view label, bool* found) {
  *found = false;
  while (!s.empty()) {
    const auto eol = s.find('\n');
    std::string_view line = s.substr(0, eol);
    s = eol == std::string_view::npos ? std::string_view{} : s.substr(eol + 1);

    line = trim(line);
    while (!line.empty() && (line.front() == '*' || line.front() == '-')) line.remove_prefix(1);
    line = trim(line);
    if (line.substr(0, label.size()) == label) {
      *found = true;
      std::string_view value = line.substr(label.size());
      while (!value.empty() && value.front() == '*') value.remove_prefix(1);
      return std::string(trim(value));
    }
  }
  return {};
}

std::string normalize_answer(std::string_view s) {
  std::string cleaned;
  cleaned.reserve(s.size());
  for (char c : s) {
    if (is_alnum(c) || is_space(c)) {
      cleaned += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (static_cast<unsigned char>(c) >= 0x80) {
      cleaned += c;  // keep non-ASCII bytes as-is
    } else {
      cleaned += ' ';
    }
  }
  std::string out;
  for (const auto& word : split(cleaned, ' ')) {
    if (word.empty() || word == "a" || word == "an" || word == "the") continue;
    if (!out.empty()) out += ' ';
    out += word;
  }
  return out;
}

std::string leading_word(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && !is_alnum(s[i])) ++i;
  std::size_t j = i;
  while (j < s.size() && std::isalpha(static_cast<unsigned char>(s[j])) != 0) ++j;
  return lower(s.substr(i, j - i));
}

bool glob_match(std::string_view pattern, std::string_view s) {
  std::size_t p = 0, i = 0, star = std::string_view::npos, mark = 0;
  while (i < s.size()) {
    if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = i;
    } else if (p < pattern.size() && pattern[p] == s[i]) {
      ++p;
      ++i;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      i = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace negbias::text
