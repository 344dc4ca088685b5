#include "ppto/format.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "ppto/errors.hpp"

namespace ppto {

std::string format_number(double value) {
    if (std::isnan(value))
        return "nan";
    if (std::isinf(value))
        return value > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string format_label_number(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", value);
    return buf;
}

double parse_number(const std::string& text, const std::string& what) {
    if (text.empty())
        throw ConfigError("empty value for " + what);
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size())
        throw ConfigError("cannot parse '" + text + "' as a number for " + what);
    return v;
}

}  // namespace ppto
