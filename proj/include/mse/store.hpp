#pragma once

#include "mse/core.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mse {

inline constexpr const char* kStoreEnv = "MSE_STORE";

std::string sha256_hex(const std::string& bytes);

// Digest of kind, schema version and the canonical descriptor text.
std::string cache_key(const std::string& kind, const std::string& canonicalDescriptor, int schema = 1);

struct StoreReceipt {
    std::string key;
    std::filesystem::path path;
    std::size_t bytes = 0;
    std::string contentDigest;
};

struct StoreEntry {
    std::string key;
    std::size_t bytes = 0;
    std::string label;
};

// Layout: <root>/objects/<key> holds a one-line header ("mse-store 1 <sha256> <size>") followed by the bytes;
// <root>/index.tsv lists key, size and label. Writes go to <root>/tmp and are renamed into place.
class Store {
public:
    explicit Store(std::filesystem::path root);
    // Root from MSE_STORE, else `fallback`.
    static Store from_env(const std::filesystem::path& fallback = ".mse-store");

    StoreReceipt put(const std::string& key, const std::string& bytes, const std::string& label = "");
    // IntegrityError naming the key when the entry fails its digest.
    std::optional<std::string> get(const std::string& key) const;
    bool contains(const std::string& key) const;
    std::vector<StoreEntry> list() const;
    const std::filesystem::path& root() const { return root_; }

    // Test hook: abort a put after this many payload bytes, leaving only the temporary file behind.
    std::optional<std::size_t> failAfterBytes;

private:
    std::filesystem::path root_;
    std::filesystem::path object_path(const std::string& key) const;
    void write_atomic(const std::filesystem::path& dst, const std::string& data, std::optional<std::size_t> cut);
};

}  // namespace mse
