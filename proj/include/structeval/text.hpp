#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace structeval::text {

// Offsets throughout the library are in Unicode scalar values. Internally the
// parser works on wide strings (wchar_t is UTF-32 on this platform), so one
// wide character is one scalar value.
std::wstring utf8_to_wide(std::string_view utf8);
std::string wide_to_utf8(std::wstring_view wide);

// Maximal runs of non-whitespace characters. Whitespace is the ASCII set
// (space, \t, \n, \r, \v, \f); multi-byte UTF-8 units never collide with it.
std::vector<std::string> whitespace_tokens(std::string_view s);
std::size_t token_count(std::string_view s);

// FNV-1a, the deterministic hash used for feature hashing and cache headers.
std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed = 14695981039346656037ULL);

// Hex-encoded SHA-256 of the input, used as content digest for cache keys and
// config fingerprints.
std::string sha256_hex(std::string_view data);

// Shortest decimal form that round-trips the double.
std::string format_double(double v);

}  // namespace structeval::text
