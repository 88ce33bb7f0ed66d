#include "dsim/scen/manifest.hpp"

#include <fstream>

#include <json.hpp>

#include <dsim/version.hpp>
#include "dsim/io/sha256.hpp"

namespace dsim {

void Manifest::add(const std::string& name) {
    files.emplace_back(name, sha256_file(out_dir + "/" + name));
}

void Manifest::write() const {
    nlohmann::ordered_json j;
    j["scenario"] = scenario;
    j["version"] = kVersion;
    nlohmann::ordered_json fl = nlohmann::ordered_json::object();
    for (const auto& [name, hash] : files) fl[name] = hash;
    j["files"] = fl;
    std::ofstream f(out_dir + "/manifest.json", std::ios::trunc);
    f << j.dump(2) << "\n";
}

std::string metadata_json(const Config& c) {
    nlohmann::ordered_json j;
    j["scenario"] = c.scenario;
    j["version"] = kVersion;
    j["config"] = serialize_config(c);
    return j.dump();
}

void write_metrics(const std::string& out_dir, const std::map<std::string, double>& metrics,
                   Manifest& manifest) {
    nlohmann::ordered_json j;
    for (const auto& [k, v] : metrics) j[k] = v;
    std::ofstream f(out_dir + "/metrics.json", std::ios::trunc);
    f << j.dump(2) << "\n";
    f.close();
    manifest.add("metrics.json");
}

}  // namespace dsim
