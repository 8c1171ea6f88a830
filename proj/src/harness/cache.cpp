#include "gplan/cache.hpp"

#include "gplan/encoders.hpp"
#include "gplan/error.hpp"

#include <openssl/evp.h>

#include <atomic>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>

namespace gplan {

namespace fs = std::filesystem;

std::string sha256_hex(std::string_view data) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    unsigned char out[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 || EVP_DigestFinal_ex(ctx.get(), out, &len) != 1)
        throw Error("SHA-256 computation failed");
    static const char *hex = "0123456789abcdef";
    std::string s;
    s.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        s += hex[out[i] >> 4];
        s += hex[out[i] & 15];
    }
    return s;
}

Digest &Digest::add(std::string_view part) {
    buffer_ += std::to_string(part.size());
    buffer_ += ':';
    buffer_ += part;
    return *this;
}

Digest &Digest::add(double value) { return add(format_double(value)); }

Digest &Digest::add(long long value) { return add(std::to_string(value)); }

std::string Digest::hex() const { return sha256_hex(buffer_); }

std::string read_file(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const fs::path &path, std::string_view content) {
    static std::atomic<unsigned long> counter{0};
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ostringstream suffix;
    suffix << ".tmp." << std::hash<std::thread::id>{}(std::this_thread::get_id()) << '.' << counter++;
    fs::path tmp = path;
    tmp += suffix.str();
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out)
            throw Error("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

StageCache::StageCache(fs::path root, bool force) : root_(std::move(root)), force_(force) {}

std::optional<std::string> StageCache::load(std::string_view stage, const std::string &digest) const {
    if (force_) {
        ++misses_;
        return std::nullopt;
    }
    fs::path p = root_ / std::string(stage) / digest;
    std::error_code ec;
    if (!fs::is_regular_file(p, ec)) {
        ++misses_;
        return std::nullopt;
    }
    ++hits_;
    return read_file(p);
}

void StageCache::store(std::string_view stage, const std::string &digest, std::string_view content) const {
    write_file_atomic(root_ / std::string(stage) / digest, content);
}

}  // namespace gplan
