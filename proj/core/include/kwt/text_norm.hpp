#pragma once

#include <string>
#include <vector>

namespace kwt {

// Answer-string normalization applied before exact-match and ROUGE
// comparisons: lowercase, drop punctuation, drop standalone articles
// ("a", "an", "the"), collapse whitespace runs, trim. ASCII-only by design.
std::string normalize(const std::string& text);

// normalize() followed by a whitespace split.
std::vector<std::string> normalize_tokens(const std::string& text);

// Collapses internal whitespace runs to single spaces and trims the ends.
std::string collapse_whitespace(const std::string& text);

// Removes every occurrence of the "<IDK>" literal and re-normalizes
// whitespace. Idempotent; leaves IDK-free text unchanged apart from
// whitespace collapsing.
std::string strip_idk(const std::string& text);

// True when the "<IDK>" literal occurs anywhere in the text.
bool contains_idk(const std::string& text);

// Cuts the text at the first newline. Few-shot continuation models tend to
// run on into the next "Question:" block; only the first line is the answer.
std::string first_line(const std::string& text);

std::string trim(const std::string& text);

}  // namespace kwt
