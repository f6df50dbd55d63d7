#pragma once

// Strict accessors for hand-written JSON documents. Every helper throws
// SchemaError naming the offending key.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "sonify/session_io.hpp"

namespace sonify::json_util {

using nlohmann::json;

inline void expect_object(const json& j, std::string_view what) {
    if (!j.is_object()) {
        throw SchemaError(std::string(what) + " must be a JSON object");
    }
}

inline void allow_only(const json& j, std::initializer_list<std::string_view> keys, std::string_view what) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const auto k : keys) {
            if (it.key() == k) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw SchemaError("unknown field '" + it.key() + "' in " + std::string(what));
        }
    }
}

inline const json& field(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end()) {
        throw SchemaError(std::string("missing field '") + key + "'");
    }
    return *it;
}

inline double as_number(const json& v, const char* key) {
    if (!v.is_number()) {
        throw SchemaError(std::string("field '") + key + "' must be a number");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
        throw SchemaError(std::string("field '") + key + "' must be finite");
    }
    return d;
}

inline double number(const json& j, const char* key) {
    return as_number(field(j, key), key);
}

inline double number_or(const json& j, const char* key, double fallback) {
    const auto it = j.find(key);
    return it == j.end() ? fallback : as_number(*it, key);
}

inline std::uint64_t unsigned_integer(const json& v, const char* key,
                                      std::uint64_t max = std::numeric_limits<std::uint64_t>::max()) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
        throw SchemaError(std::string("field '") + key + "' must be a non-negative integer");
    }
    const auto u = v.get<std::uint64_t>();
    if (u > max) {
        throw SchemaError(std::string("field '") + key + "' is out of range");
    }
    return u;
}

inline std::uint64_t unsigned_integer(const json& j, const char* key, std::uint64_t fallback, bool /*optional*/) {
    const auto it = j.find(key);
    return it == j.end() ? fallback : unsigned_integer(*it, key);
}

inline bool boolean(const json& v, const char* key) {
    if (!v.is_boolean()) {
        throw SchemaError(std::string("field '") + key + "' must be true or false");
    }
    return v.get<bool>();
}

inline bool boolean_or(const json& j, const char* key, bool fallback) {
    const auto it = j.find(key);
    return it == j.end() ? fallback : boolean(*it, key);
}

inline std::string string(const json& v, const char* key) {
    if (!v.is_string()) {
        throw SchemaError(std::string("field '") + key + "' must be a string");
    }
    return v.get<std::string>();
}

inline TrackId track_id(const json& v, const char* key) {
    return TrackId{static_cast<std::uint32_t>(unsigned_integer(v, key, std::numeric_limits<std::uint32_t>::max()))};
}

template <class Parse>
auto enum_field(const json& v, const char* key, Parse parse) {
    const auto parsed = parse(string(v, key));
    if (!parsed) {
        throw SchemaError(std::string("field '") + key + "' has unknown value '" + v.get<std::string>() + "'");
    }
    return *parsed;
}

}  // namespace sonify::json_util
