#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace grouptree {

/// SHA-256 as a lowercase hex string.
std::string sha256_hex(const void* data, std::size_t size);
std::string sha256_hex(const std::string& data);

/// Digest of a file's bytes; throws DataError when the file cannot be read.
std::string sha256_file(const std::string& path);

}  // namespace grouptree
