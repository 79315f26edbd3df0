#include "cesnet/manifest.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "cesnet/error.hpp"

#ifndef CESNET_VERSION
#define CESNET_VERSION "0.0.0"
#endif

namespace cesnet {

namespace {

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new()) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) throw std::runtime_error("SHA-256 init");
    }
    ~Sha256() { EVP_MD_CTX_free(ctx_); }
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    void update(const void* data, std::size_t n) { EVP_DigestUpdate(ctx_, data, n); }
    std::string hex() {
        unsigned char md[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        EVP_DigestFinal_ex(ctx_, md, &len);
        std::string out;
        for (unsigned i = 0; i < len; ++i) out += fmt::format("{:02x}", md[i]);
        return out;
    }

private:
    EVP_MD_CTX* ctx_;
};

}  // namespace

std::string_view version() { return CESNET_VERSION; }

std::string sha256_hex(std::string_view data) {
    Sha256 h;
    h.update(data.data(), data.size());
    return h.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(fmt::format("cannot open {}", path.string()));
    Sha256 h;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) h.update(buf, static_cast<std::size_t>(in.gcount()));
    return h.hex();
}

std::string timestamp_now() {
    std::chrono::sys_seconds t;
    if (const char* env = std::getenv("SOURCE_DATE_EPOCH"); env && *env) {
        t = std::chrono::sys_seconds{std::chrono::seconds{std::strtoll(env, nullptr, 10)}};
    } else {
        t = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
    }
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", t);
}

std::string RunManifest::config_digest() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["parameters"] = parameters;
    j["seed"] = seed ? nlohmann::ordered_json(*seed) : nlohmann::ordered_json(nullptr);
    return sha256_hex(j.dump());
}

std::string RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["toolkit_version"] = version();
    j["config_digest"] = config_digest();
    j["seed"] = seed ? nlohmann::ordered_json(*seed) : nlohmann::ordered_json(nullptr);
    j["parameters"] = parameters;
    auto files = [](const std::vector<FileDigest>& v) {
        auto a = nlohmann::ordered_json::array();
        for (const auto& f : v) a.push_back({{"path", f.path}, {"sha256", f.sha256}});
        return a;
    };
    j["inputs"] = files(inputs);
    j["outputs"] = files(outputs);
    j["started_at"] = started_at;
    j["finished_at"] = finished_at;
    return j.dump(2) + "\n";
}

void write_manifest(const std::filesystem::path& out_dir, RunManifest manifest,
                    const std::vector<std::string>& outputs) {
    for (const auto& o : outputs) manifest.outputs.push_back({o, sha256_file(out_dir / o)});
    if (manifest.finished_at.empty()) manifest.finished_at = timestamp_now();
    std::ofstream out(out_dir / "manifest.json", std::ios::binary);
    if (!out) throw InputError(fmt::format("cannot write {}", (out_dir / "manifest.json").string()));
    out << manifest.to_json();
}

}  // namespace cesnet
