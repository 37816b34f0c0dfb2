#include "mse/store.hpp"

#include <openssl/evp.h>

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace mse {

namespace fs = std::filesystem;

namespace {

constexpr const char* kMagic = "mse-store";
constexpr int kFormat = 1;

bool valid_key(const std::string& k) {
    return k.size() == 64 && std::all_of(k.begin(), k.end(), [](char c) {
               return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
           });
}

void require_key(const std::string& k) {
    if (!valid_key(k)) throw ContractError("store: key must be 64 lowercase hex digits, got '" + k + "'");
}

std::string read_all(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ResourceError("store: cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_fd(int fd, const char* data, std::size_t n, const fs::path& p) {
    while (n > 0) {
        const ssize_t w = ::write(fd, data, n);
        if (w < 0) {
            ::close(fd);
            throw ResourceError("store: write failed for " + p.string());
        }
        data += w;
        n -= static_cast<std::size_t>(w);
    }
}

std::atomic<u64> g_tmpCounter{0};

}  // namespace

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw ResourceError("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string cache_key(const std::string& kind, const std::string& canonicalDescriptor, int schema) {
    return sha256_hex(kind + "\n" + std::to_string(schema) + "\n" + canonicalDescriptor);
}

Store::Store(fs::path root) : root_(std::move(root)) {
    std::error_code ec;
    fs::create_directories(root_ / "objects", ec);
    fs::create_directories(root_ / "tmp", ec);
    if (!fs::is_directory(root_ / "objects") || !fs::is_directory(root_ / "tmp"))
        throw ResourceError("store: cannot create store directories under " + root_.string());
}

Store Store::from_env(const fs::path& fallback) {
    const char* env = std::getenv(kStoreEnv);
    return Store(env && *env ? fs::path(env) : fallback);
}

fs::path Store::object_path(const std::string& key) const { return root_ / "objects" / key; }

void Store::write_atomic(const fs::path& dst, const std::string& data, std::optional<std::size_t> cut) {
    const fs::path tmp = root_ / "tmp" /
                         (dst.filename().string() + "." + std::to_string(::getpid()) + "." +
                          std::to_string(g_tmpCounter.fetch_add(1)));
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd < 0) throw ResourceError("store: cannot create " + tmp.string());
    if (cut && *cut < data.size()) {
        write_fd(fd, data.data(), *cut, tmp);
        ::close(fd);
        throw ResourceError("store: write interrupted after " + std::to_string(*cut) + " bytes");
    }
    write_fd(fd, data.data(), data.size(), tmp);
    if (::fsync(fd) != 0) {
        ::close(fd);
        throw ResourceError("store: fsync failed for " + tmp.string());
    }
    ::close(fd);
    std::error_code ec;
    fs::rename(tmp, dst, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw ResourceError("store: rename into " + dst.string() + " failed");
    }
}

StoreReceipt Store::put(const std::string& key, const std::string& bytes, const std::string& label) {
    require_key(key);
    if (label.find_first_of("\t\n") != std::string::npos) throw ContractError("store: label with tab or newline");
    const std::string digest = sha256_hex(bytes);
    const std::string head =
        std::string(kMagic) + " " + std::to_string(kFormat) + " " + digest + " " + std::to_string(bytes.size()) + "\n";
    std::optional<std::size_t> cut;
    if (failAfterBytes) cut = head.size() + *failAfterBytes;
    write_atomic(object_path(key), head + bytes, cut);

    // Index: read, upsert, rewrite atomically.
    std::map<std::string, std::pair<std::string, std::string>> idx;
    const fs::path ip = root_ / "index.tsv";
    if (fs::exists(ip)) {
        std::istringstream in(read_all(ip));
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::istringstream ls(line);
            std::string k, sz, lb;
            std::getline(ls, k, '\t');
            std::getline(ls, sz, '\t');
            std::getline(ls, lb);
            if (valid_key(k)) idx[k] = {sz, lb};
        }
    }
    idx[key] = {std::to_string(bytes.size()), label};
    std::string text = "# key\tbytes\tlabel\n";
    for (const auto& [k, v] : idx) text += k + "\t" + v.first + "\t" + v.second + "\n";
    write_atomic(ip, text, std::nullopt);
    return {key, object_path(key), bytes.size(), digest};
}

std::optional<std::string> Store::get(const std::string& key) const {
    require_key(key);
    const fs::path p = object_path(key);
    if (!fs::exists(p)) return std::nullopt;
    const std::string raw = read_all(p);
    const auto nl = raw.find('\n');
    if (nl == std::string::npos) throw IntegrityError("store: entry " + key + " has no header");
    std::istringstream hs(raw.substr(0, nl));
    std::string magic, digest;
    int format = 0;
    std::size_t size = 0;
    if (!(hs >> magic >> format >> digest >> size) || magic != kMagic || format != kFormat)
        throw IntegrityError("store: entry " + key + " has a malformed header");
    std::string body = raw.substr(nl + 1);
    if (body.size() != size)
        throw IntegrityError("store: entry " + key + " has " + std::to_string(body.size()) + " bytes, header says " +
                             std::to_string(size));
    if (sha256_hex(body) != digest) throw IntegrityError("store: entry " + key + " fails its content digest");
    return body;
}

bool Store::contains(const std::string& key) const {
    require_key(key);
    return fs::exists(object_path(key));
}

std::vector<StoreEntry> Store::list() const {
    std::map<std::string, std::string> labels;
    const fs::path ip = root_ / "index.tsv";
    if (fs::exists(ip)) {
        std::istringstream in(read_all(ip));
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            const auto t1 = line.find('\t'), t2 = line.find('\t', t1 + 1);
            if (t1 == std::string::npos || t2 == std::string::npos) continue;
            labels[line.substr(0, t1)] = line.substr(t2 + 1);
        }
    }
    std::vector<StoreEntry> out;
    for (const auto& e : fs::directory_iterator(root_ / "objects")) {
        const std::string k = e.path().filename().string();
        if (!valid_key(k)) continue;
        StoreEntry s;
        s.key = k;
        const std::string raw = read_all(e.path());
        const auto nl = raw.find('\n');
        s.bytes = nl == std::string::npos ? 0 : raw.size() - nl - 1;
        const auto it = labels.find(k);
        if (it != labels.end()) s.label = it->second;
        out.push_back(std::move(s));
    }
    std::sort(out.begin(), out.end(), [](const StoreEntry& a, const StoreEntry& b) { return a.key < b.key; });
    return out;
}

}  // namespace mse
