#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace opssc {

// gzip-framed deflate (zlib windowBits 15+16). Throws std::runtime_error on
// corrupt input.
std::vector<std::uint8_t> gzip_compress(std::span<const std::uint8_t> data);
std::vector<std::uint8_t> gzip_decompress(std::span<const std::uint8_t> data);

} // namespace opssc
