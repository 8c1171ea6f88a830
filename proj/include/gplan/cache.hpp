#pragma once

// Content-addressed stage cache and small file helpers.

#include <atomic>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>

namespace gplan {

/// Lower-case hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// Incremental digest over length-prefixed parts, so ("ab","c") != ("a","bc").
class Digest {
public:
    Digest &add(std::string_view part);
    Digest &add(double value);
    Digest &add(long long value);
    std::string hex() const;

private:
    std::string buffer_;
};

std::string read_file(const std::filesystem::path &path);
/// Writes to a temporary sibling, then renames over `path`.
void write_file_atomic(const std::filesystem::path &path, std::string_view content);

/// Stage outputs stored under root/<stage>/<digest>. Entries are immutable;
/// `force` makes lookups miss so every stage reruns and republishes.
class StageCache {
public:
    StageCache(std::filesystem::path root, bool force = false);

    std::optional<std::string> load(std::string_view stage, const std::string &digest) const;
    void store(std::string_view stage, const std::string &digest, std::string_view content) const;

    const std::filesystem::path &root() const { return root_; }
    bool force() const { return force_; }
    std::size_t hits() const { return hits_; }
    std::size_t misses() const { return misses_; }

private:
    std::filesystem::path root_;
    bool force_;
    mutable std::atomic<std::size_t> hits_{0};
    mutable std::atomic<std::size_t> misses_{0};
};

}  // namespace gplan
