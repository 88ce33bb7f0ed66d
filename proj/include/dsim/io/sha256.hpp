#pragma once

#include <cstdint>
#include <string>

namespace dsim {

// FIPS 180-4 SHA-256, used for the output manifest content hashes.
std::string sha256_hex(const void* data, size_t len);
std::string sha256_file(const std::string& path);

}  // namespace dsim
