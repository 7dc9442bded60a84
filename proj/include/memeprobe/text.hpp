#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace memeprobe::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

// Runs of whitespace become a single space; leading/trailing whitespace dropped.
std::string collapse_whitespace(std::string_view s);

// Lowercase + collapsed whitespace + trailing punctuation stripped.
std::string normalize_statement(std::string_view s);

// "Child Exploitation" -> "child-exploitation"
std::string slug(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);

} // namespace memeprobe::text
