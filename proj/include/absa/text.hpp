#pragma once

#include <string>
#include <string_view>
#include <vector>

// Byte-level text helpers shared by the dataset, retrieval, parser and
// scoring modules. Bytes >= 0x80 count as word characters so UTF-8 words stay
// intact; only ASCII letters are case-folded.
namespace absa::text {

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);
// Lowercase, trim, and collapse internal whitespace runs to one space.
std::string fold(std::string_view s);
// Lowercased maximal runs of alphanumeric bytes.
std::vector<std::string> words(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view bytes);

}  // namespace absa::text
