#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace nsgp::csv {

// Splits one CSV record. Double-quoted fields may contain commas; a doubled
// quote inside a quoted field is a literal quote.
std::vector<std::string> split_record(std::string_view line);

// Quotes the field if it contains a comma, quote or whitespace edge.
std::string escape(std::string_view field);

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

} // namespace nsgp::csv
