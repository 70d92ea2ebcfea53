#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace polyg {

// Lowercases ASCII letters; leaves other bytes untouched.
std::string to_lower(std::string_view s);

// Strips leading/trailing ASCII whitespace.
std::string trim(std::string_view s);

// Collapses runs of whitespace to single spaces and trims the ends.
std::string collapse_whitespace(std::string_view s);

// Entity name normalization used by the name index and gold answers:
// lowercase + trim + collapse inner whitespace.
std::string normalize_name(std::string_view s);

// Tokenizes to lowercase alphanumeric words; every other byte is a
// separator.
std::vector<std::string> word_tokens(std::string_view s);

// True when `needle`'s token sequence appears contiguously in `haystack`'s
// token sequence.
bool tokens_contain(const std::vector<std::string>& haystack,
                    const std::vector<std::string>& needle);

// 64-bit FNV-1a, rendered as 16 hex digits. Stable across platforms; used
// for request fingerprints and result digests.
std::uint64_t fnv1a(std::string_view s);
std::string fnv1a_hex(std::string_view s);

// Levenshtein edit distance over bytes.
std::size_t edit_distance(std::string_view a, std::string_view b);

// Splits on a separator character, keeping empty fields.
std::vector<std::string> split(std::string_view s, char sep);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace polyg
