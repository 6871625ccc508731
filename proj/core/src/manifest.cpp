#include "superbsde/manifest.hpp"
#include "superbsde/errors.hpp"

#include "json.hpp"

#include <openssl/evp.h>

#include <cctype>
#include <fstream>
#include <sstream>

namespace superbsde {

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr))
        throw ManifestError("SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xf]);
    }
    return out;
}

std::string canonicalize_config_text(const std::string& text) {
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        size_t e = line.find_last_not_of(" \t\r");
        out << line.substr(b, e - b + 1) << '\n';
    }
    return out.str();
}

void RunManifest::save(const std::string& path) const {
    nlohmann::json j;
    j["subcommand"] = subcommand;
    j["config_digest"] = config_digest;
    j["master_seed"] = master_seed;
    j["version"] = version;
    j["wall_seconds"] = wall_seconds;
    j["pass"] = pass;
    nlohmann::json res = nlohmann::json::object();
    for (const auto& [k, v] : resolutions) res[k] = v;
    j["resolutions"] = res;
    nlohmann::json cons = nlohmann::json::object();
    for (const auto& [k, v] : constants) cons[k] = v;
    j["constants"] = cons;
    j["outputs"] = outputs;
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ManifestError("cannot write manifest: " + path);
    out << j.dump(2) << '\n';
}

RunManifest RunManifest::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ManifestError("cannot open manifest: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ManifestError("corrupt manifest " + path + ": " + e.what());
    }
    RunManifest m;
    try {
        m.subcommand = j.at("subcommand").get<std::string>();
        m.config_digest = j.at("config_digest").get<std::string>();
        m.master_seed = j.at("master_seed").get<std::uint64_t>();
        m.version = j.value("version", std::string{});
        m.wall_seconds = j.value("wall_seconds", 0.0);
        m.pass = j.value("pass", true);
        if (j.contains("resolutions"))
            for (auto it = j["resolutions"].begin(); it != j["resolutions"].end(); ++it)
                m.resolutions.emplace_back(it.key(), it.value().get<std::string>());
        if (j.contains("constants"))
            for (auto it = j["constants"].begin(); it != j["constants"].end(); ++it)
                m.constants.emplace_back(it.key(), it.value().get<double>());
        if (j.contains("outputs"))
            m.outputs = j["outputs"].get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw ManifestError("manifest " + path + " missing fields: " + e.what());
    }
    return m;
}

} // namespace superbsde
