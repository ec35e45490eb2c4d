#include "digest.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace opssc {

bool digest32::is_zero() const {
    for (auto b : bytes)
        if (b != 0) return false;
    return true;
}

std::string digest32::hex() const {
    static constexpr char tab[] = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (auto b : bytes) {
        out.push_back(tab[b >> 4]);
        out.push_back(tab[b & 0x0f]);
    }
    return out;
}

static int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

digest32 digest32::from_hex(std::string_view hex) {
    if (hex.size() != 64)
        throw std::invalid_argument("digest hex must be 64 characters, got " +
                                    std::to_string(hex.size()));
    digest32 d;
    for (size_t i = 0; i < 32; ++i) {
        int hi = hex_nibble(hex[2 * i]);
        int lo = hex_nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0)
            throw std::invalid_argument("digest hex contains a non-hex character");
        d.bytes[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return d;
}

digest32 sha256(std::span<const std::uint8_t> data) {
    digest32 out;
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.bytes.data(), &len, EVP_sha256(), nullptr) != 1 ||
        len != out.bytes.size())
        throw std::runtime_error("sha256: digest computation failed");
    return out;
}

digest32 sha256(std::string_view data) {
    return sha256(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
}

} // namespace opssc
