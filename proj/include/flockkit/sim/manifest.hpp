#pragma once

#include <openssl/sha.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace flockkit::sim {

/// SHA-1 of "blob <size>\0<content>", i.e. what `git hash-object` prints.
inline std::string git_blob_hash(const std::string& content) {
    const std::string data = "blob " + std::to_string(content.size()) + std::string(1, '\0') + content;
    unsigned char md[SHA_DIGEST_LENGTH];
    SHA1(reinterpret_cast<const unsigned char*>(data.data()), data.size(), md);
    std::string hex;
    char buf[3];
    for (unsigned char b : md) {
        std::snprintf(buf, sizeof buf, "%02x", b);
        hex += buf;
    }
    return hex;
}

inline void write_manifest(const std::filesystem::path& dir, const std::string& resolved_config,
                           const std::string& command) {
    std::ofstream out(dir / "manifest.txt");
    if (!out) throw std::runtime_error("cannot write manifest in " + dir.string());
    out << "# flockkit run manifest\n";
    out << "command=" << command << '\n';
    out << "config_hash=" << git_blob_hash(resolved_config) << '\n';
    out << "# resolved configuration\n";
    out << resolved_config;
}

} // namespace flockkit::sim
