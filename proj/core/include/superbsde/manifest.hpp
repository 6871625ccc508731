#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace superbsde {

// One run = one manifest, written next to the outputs.  The digest is the
// SHA-256 of the canonicalized config text so reruns can be checked for
// drift.
struct RunManifest {
    std::string subcommand;
    std::string config_digest;
    std::string config_text;      // canonicalized
    std::uint64_t master_seed = 0;
    std::string version = "0.1.0";
    std::vector<std::pair<std::string, std::string>> resolutions;   // name -> value
    std::vector<std::pair<std::string, double>> constants;          // calibrated constants
    std::vector<std::string> outputs;                               // files written
    double wall_seconds = 0.0;
    bool pass = true;

    void save(const std::string& path) const;
    static RunManifest load(const std::string& path);
};

std::string sha256_hex(const std::string& data);

// strips comments and whitespace-only differences before hashing
std::string canonicalize_config_text(const std::string& text);

} // namespace superbsde
