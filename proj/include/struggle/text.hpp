#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace struggle::text {

// Lowercased whitespace tokens.
std::vector<std::string> query_terms(std::string_view q);

// Lowercased runs of ASCII alphanumerics; everything else separates tokens.
std::vector<std::string> alnum_tokens(std::string_view s);

using TermCounts = std::map<std::string, double>;

TermCounts term_counts(const std::vector<std::string>& tokens);

// Cosine of two sparse vectors; 0 when either is empty or all-zero.
double cosine(const TermCounts& a, const TermCounts& b);

// Term-frequency cosine of two queries.
double query_cosine(std::string_view q1, std::string_view q2);

// Character-level Levenshtein distance.
std::size_t edit_distance(std::string_view a, std::string_view b);

// Host part of a URL with any leading "www." removed; the whole string when
// no scheme is present and no '/' follows.
std::string url_domain(std::string_view url);

}  // namespace struggle::text
