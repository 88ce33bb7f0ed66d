#pragma once

#include <map>
#include <string>
#include <vector>

#include "dsim/core/config.hpp"

namespace dsim {

// Output bookkeeping: every emitted file is listed with a content hash so
// reruns with identical config are verifiable bit-for-bit.
struct Manifest {
    std::string scenario;
    std::string out_dir;
    std::vector<std::pair<std::string, std::string>> files;  // name -> sha256

    void add(const std::string& name);
    void write() const;  // manifest.json (not itself listed)
};

// One-line JSON header carried by every emitted file: resolved config plus
// the version string.
std::string metadata_json(const Config& c);

void write_metrics(const std::string& out_dir, const std::map<std::string, double>& metrics,
                   Manifest& manifest);

}  // namespace dsim
