#pragma once
#include <cstdint>
#include <string>
#include <vector>

namespace speclab {

inline constexpr const char* kToolVersion = "0.1.0";

// FNV-1a content digest, printed as 16 hex digits.
std::uint64_t fnv1a64(const std::string& data);
std::string digest_hex(const std::string& data);

// Write a file, creating parent directories. Returns the content digest.
std::string write_file(const std::string& path, const std::string& content);

// Per-command run manifest: configuration digest, outputs with digests,
// wall-clock timings, and the failed stage on error.
struct RunManifest {
    std::string command;
    std::string config_digest;
    std::vector<std::pair<std::string, std::string>> outputs;  // path, digest
    std::vector<std::pair<std::string, double>> timings;       // stage, seconds
    std::string status = "ok";
    std::string failed_stage;

    std::string to_json() const;
};

} // namespace speclab
