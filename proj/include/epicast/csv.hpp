#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace epicast::csv {

/// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
/// Returns false on an unterminated quote.
bool split_record(std::string_view line, std::vector<std::string>& fields);

/// Quotes a field only when it contains a comma, quote or newline.
std::string escape(std::string_view field);

std::string_view trim(std::string_view s);

}  // namespace epicast::csv
