#pragma once

#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace riskpipe {

using Json = nlohmann::ordered_json;

/// Raised for malformed documents, missing fields, enum violations and
/// failed cross-checks. The message always names the offending field.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Parse a JSON document, rephrasing syntax errors with their byte offset.
inline Json parse_json_text(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
    }
}

/// Format a double as decimal text with 17 significant digits; round-trips
/// IEEE-754 binary64 exactly.
inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double parse_g17(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw ConfigError("corrupted numeric field: \"" + s + "\"");
    return v;
}

}  // namespace riskpipe
