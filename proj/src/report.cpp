#include "speclab/report.hpp"
#include "speclab/errors.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace speclab {

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string digest_hex(const std::string& data) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(data)));
    return buf;
}

std::string write_file(const std::string& path, const std::string& content) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw SpeclabError("write_file: cannot open " + path);
    out << content;
    out.close();
    return digest_hex(content);
}

std::string RunManifest::to_json() const {
    nlohmann::json j;
    j["tool_version"] = kToolVersion;
    j["command"] = command;
    j["config_digest"] = config_digest;
    j["status"] = status;
    if (!failed_stage.empty()) j["failed_stage"] = failed_stage;
    j["outputs"] = nlohmann::json::array();
    for (const auto& [path, digest] : outputs)
        j["outputs"].push_back({{"path", path}, {"digest", digest}});
    j["timings"] = nlohmann::json::array();
    for (const auto& [stage, sec] : timings)
        j["timings"].push_back({{"stage", stage}, {"seconds", sec}});
    return j.dump(2) + "\n";
}

} // namespace speclab
