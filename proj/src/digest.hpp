#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace opssc {

// Project-wide 256-bit content digest. The algorithm is SHA-256 everywhere;
// docs/encoding.md documents every preimage layout bit-exactly.
struct digest32 {
    std::array<std::uint8_t, 32> bytes{};

    auto operator<=>(const digest32&) const = default;

    bool is_zero() const;
    std::string hex() const;
    static digest32 from_hex(std::string_view hex);
};

digest32 sha256(std::span<const std::uint8_t> data);
digest32 sha256(std::string_view data);

} // namespace opssc
