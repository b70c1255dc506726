#include "kwt/text_norm.hpp"

#include <cctype>
#include <sstream>

#include "kwt/version.hpp"

namespace kwt {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

bool is_article(const std::string& token) {
  return token == "a" || token == "an" || token == "the";
}

}  // namespace

std::string trim(const std::string& text) {
  std::size_t b = 0;
  std::size_t e = text.size();
  while (b < e && is_space(text[b])) ++b;
  while (e > b && is_space(text[e - 1])) --e;
  return text.substr(b, e - b);
}

std::string collapse_whitespace(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(c);
  }
  return out;
}

std::vector<std::string> normalize_tokens(const std::string& text) {
  // Lowercase and delete punctuation first, so "The Eiffel Tower." becomes
  // "the eiffel tower" before article removal.
  std::string cleaned;
  cleaned.reserve(text.size());
  for (char c : text) {
    if (is_punct(c)) continue;
    cleaned.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }

  std::vector<std::string> tokens;
  std::string token;
  std::istringstream in(cleaned);
  while (in >> token) {
    if (!is_article(token)) tokens.push_back(token);
  }
  return tokens;
}

std::string normalize(const std::string& text) {
  std::string out;
  for (const auto& token : normalize_tokens(text)) {
    if (!out.empty()) out.push_back(' ');
    out += token;
  }
  return out;
}

bool contains_idk(const std::string& text) {
  return text.find(kIdkToken) != std::string::npos;
}

std::string strip_idk(const std::string& text) {
  std::string out = text;
  const std::string token = kIdkToken;
  std::size_t pos;
  while ((pos = out.find(token)) != std::string::npos) {
    out.erase(pos, token.size());
  }
  return collapse_whitespace(out);
}

std::string first_line(const std::string& text) {
  std::size_t pos = text.find('\n');
  if (pos == std::string::npos) return text;
  return text.substr(0, pos);
}

}  // namespace kwt
