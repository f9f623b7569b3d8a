#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace thyrotex::csv {

// Splits one CSV record. Double-quoted fields may contain commas and "" escapes;
// unquoted fields are trimmed of surrounding spaces.
std::vector<std::string> split(std::string_view line);

// Quotes a field only when it needs it.
std::string escape(std::string_view field);

std::string_view trim(std::string_view s);

// Skippable line: blank or '#' comment.
bool is_ignorable(std::string_view line);

// Shortest decimal form that round-trips a double (17 significant digits max).
std::string format_real(double value);

double parse_real(std::string_view text, std::string_view what);
long long parse_int(std::string_view text, std::string_view what);

} // namespace thyrotex::csv
