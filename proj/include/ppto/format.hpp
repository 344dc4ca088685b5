#pragma once

#include <string>

namespace ppto {

/// Shortest "%.17g" rendering; NaN prints as "nan", infinities as "inf"/"-inf".
std::string format_number(double value);

/// "%g" rendering for labels.
std::string format_label_number(double value);

/// Parses a full string as a double; throws ConfigError naming `what` otherwise.
double parse_number(const std::string& text, const std::string& what);

}  // namespace ppto
