#pragma once

#include <charconv>
#include <string>

namespace bmsim {

/// Locale-independent %.17g rendering ('.' decimal point), used by every CSV writer.
inline std::string format_double(double value)
{
    char buf[32];
    const auto result = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
    return std::string(buf, result.ptr);
}

}  // namespace bmsim
