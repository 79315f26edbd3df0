#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cesnet {

std::string_view version();

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

/// UTC time as `YYYY-MM-DDTHH:MM:SSZ`. SOURCE_DATE_EPOCH, when set, replaces the clock.
std::string timestamp_now();

struct FileDigest {
    std::string path;
    std::string sha256;
};

/// Record of one command run. Output paths are relative to the output directory.
struct RunManifest {
    std::string command;
    /// Effective options, excluding the output directory.
    std::map<std::string, std::string> parameters;
    std::optional<std::uint64_t> seed;
    std::vector<FileDigest> inputs;
    std::vector<FileDigest> outputs;
    std::string started_at;
    std::string finished_at;

    /// SHA-256 of the canonical JSON of command, parameters and seed.
    std::string config_digest() const;
    std::string to_json() const;
};

/// Digests every listed output (relative to `out_dir`) and writes
/// `manifest.json` there.
void write_manifest(const std::filesystem::path& out_dir, RunManifest manifest,
                    const std::vector<std::string>& outputs);

}  // namespace cesnet
