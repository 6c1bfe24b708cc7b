#pragma once

#include <homolab/errors.hpp>
#include <homolab/io.hpp>
#include <homolab/version.hpp>

#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <string>
#include <vector>

namespace homolab {

/// Lower-case hex SHA-256 of `data`.
inline std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256: digest failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xf];
    }
    return out;
}

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Record of one CLI run, written next to its outputs.
struct RunManifest {
    std::string command;
    Json config;
    std::vector<std::uint64_t> seeds;
    std::string version{kVersion};
    std::string timestamp_utc{utc_timestamp()};

    struct Output {
        std::string path;
        std::string sha256;
        std::size_t bytes{};
    };
    std::vector<Output> outputs;

    void add_output(const std::filesystem::path& path, const std::string& content) {
        outputs.push_back({path.filename().string(), sha256_hex(content), content.size()});
    }

    Json to_json() const {
        Json j;
        j["command"] = command;
        j["config"] = config;
        j["seeds"] = seeds;
        j["version"] = version;
        j["timestamp_utc"] = timestamp_utc;
        j["outputs"] = Json::array();
        for (const auto& o : outputs) {
            j["outputs"].push_back({{"path", o.path}, {"sha256", o.sha256}, {"bytes", o.bytes}});
        }
        return j;
    }
};

/// Sidecar path for an output file: "<out>.manifest.json".
inline std::filesystem::path manifest_path_for(const std::filesystem::path& output) {
    std::filesystem::path p = output;
    p += ".manifest.json";
    return p;
}

/// Writes `content` to `path`, records it in `manifest`, then writes the manifest
/// beside it. Both writes are atomic.
inline void write_with_manifest(const std::filesystem::path& path, const std::string& content,
                                RunManifest manifest) {
    write_text_file_atomic(path, content);
    manifest.add_output(path, content);
    write_text_file_atomic(manifest_path_for(path), manifest.to_json().dump(2) + "\n");
}

/// True when every output listed in the manifest at `manifest_file` hashes to its
/// recorded digest. Output paths are resolved next to the manifest.
inline bool verify_manifest(const std::filesystem::path& manifest_file) {
    const Json j = parse_json_text(read_text_file(manifest_file), manifest_file.string());
    const auto dir = manifest_file.parent_path();
    for (const auto& o : j.at("outputs")) {
        const std::string content = read_text_file(dir / o.at("path").get<std::string>());
        if (sha256_hex(content) != o.at("sha256").get<std::string>()) return false;
    }
    return true;
}

} // namespace homolab
