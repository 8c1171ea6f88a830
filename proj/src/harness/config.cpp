#include "gplan/config.hpp"

#include "gplan/cache.hpp"
#include "gplan/encoders.hpp"

#include <charconv>
#include <sstream>

namespace gplan {

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return "";
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

Config Config::parse(std::string_view text) {
    Config c;
    std::istringstream in{std::string(text)};
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        std::string body = trim(line);
        if (body.empty())
            continue;
        auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(number) + ": expected 'key = value'");
        std::string key = trim(std::string_view(body).substr(0, eq));
        std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(number) + ": empty key");
        try {
            c.set(key, value);
        } catch (const ConfigError &e) {
            throw ConfigError("config line " + std::to_string(number) + ": " + e.what());
        }
    }
    return c;
}

Config Config::load(const std::filesystem::path &path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const Error &) {
        throw ConfigError("cannot read config file " + path.string());
    }
    return parse(text);
}

void Config::set(const std::string &key, const std::string &value) {
    for (const char *ns : {"train.", "decode.", "gen."})
        if (key.rfind(ns, 0) == 0 && key.size() > std::string_view(ns).size()) {
            values_[key] = value;
            return;
        }
    throw ConfigError("unknown config key '" + key + "' (expected train.*, decode.* or gen.*)");
}

std::optional<std::string> Config::get(const std::string &key) const {
    auto it = values_.find(key);
    if (it == values_.end())
        return std::nullopt;
    return it->second;
}

std::string Config::get_string(const std::string &key, const std::string &fallback) const {
    return get(key).value_or(fallback);
}

int Config::get_int(const std::string &key, int fallback) const {
    auto v = get(key);
    if (!v)
        return fallback;
    int out = 0;
    auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || p != v->data() + v->size())
        throw ConfigError("config key " + key + ": expected an integer, got '" + *v + "'");
    return out;
}

double Config::get_double(const std::string &key, double fallback) const {
    auto v = get(key);
    if (!v)
        return fallback;
    try {
        return parse_double(*v);
    } catch (const Error &) {
        throw ConfigError("config key " + key + ": expected a number, got '" + *v + "'");
    }
}

bool Config::get_bool(const std::string &key, bool fallback) const {
    auto v = get(key);
    if (!v)
        return fallback;
    if (*v == "true" || *v == "1" || *v == "yes" || *v == "on")
        return true;
    if (*v == "false" || *v == "0" || *v == "no" || *v == "off")
        return false;
    throw ConfigError("config key " + key + ": expected a boolean, got '" + *v + "'");
}

std::string Config::to_string() const {
    std::string out;
    for (const auto &[k, v] : values_)
        out += k + " = " + v + "\n";
    return out;
}

}  // namespace gplan
