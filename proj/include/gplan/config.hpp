#pragma once

// `key = value` configuration files. Keys are namespaced train., decode. or
// gen.; '#' starts a comment.

#include "gplan/error.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace gplan {

class ConfigError : public Error {
public:
    using Error::Error;
};

class Config {
public:
    static Config parse(std::string_view text);
    static Config load(const std::filesystem::path &path);

    /// Throws ConfigError for keys outside the known namespaces.
    void set(const std::string &key, const std::string &value);
    bool has(const std::string &key) const { return values_.count(key) > 0; }
    std::optional<std::string> get(const std::string &key) const;

    std::string get_string(const std::string &key, const std::string &fallback) const;
    int get_int(const std::string &key, int fallback) const;
    double get_double(const std::string &key, double fallback) const;
    bool get_bool(const std::string &key, bool fallback) const;

    const std::map<std::string, std::string> &values() const { return values_; }
    /// Canonical text (sorted keys), also used for digests.
    std::string to_string() const;

private:
    std::map<std::string, std::string> values_;
};

}  // namespace gplan
