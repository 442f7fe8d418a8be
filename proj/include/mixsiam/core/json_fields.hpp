#pragma once

#include <set>
#include <string>
#include <utility>

#include <json.hpp>

#include "mixsiam/core/error.hpp"

namespace mixsiam {

// Reads optional fields from a JSON object, converting type problems into
// ConfigError with the full field path, and rejects keys nobody asked for.
class FieldReader {
public:
    FieldReader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    template <typename V>
    void read(const char* key, V& out) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end() || it->is_null()) return;
        try {
            out = it->template get<V>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(field(key) + ": wrong type (" + std::string(it->type_name()) + ")");
        }
    }

    bool has(const char* key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it != j_.end() && !it->is_null();
    }

    const nlohmann::json& at(const char* key) {
        seen_.insert(key);
        return j_.at(key);
    }

    std::string field(const char* key) const { return path_ + "." + key; }

    // Call after all reads.
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) throw ConfigError(path_ + "." + it.key() + ": unknown field");
        }
    }

private:
    const nlohmann::json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

}  // namespace mixsiam
