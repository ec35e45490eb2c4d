#include <doctest.h>

#include "digest.hpp"
#include "support/ref_sha256.hpp"

#include <random>
#include <stdexcept>

using namespace opssc;
using testsupport::ref_sha256;

TEST_CASE("reference sha-256 matches the FIPS 180-4 vectors") {
    // the oracle must stand on its own feet before it judges anything
    CHECK(ref_sha256::hex_digest(std::string("")) ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(ref_sha256::hex_digest(std::string("abc")) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(ref_sha256::hex_digest(
              std::string("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq")) ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
    CHECK(ref_sha256::hex_digest(std::string(1000000, 'a')) ==
          "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");
}

TEST_CASE("production digest agrees with the reference on random inputs") {
    std::mt19937_64 rng(20260810);
    for (int i = 0; i < 200; ++i) {
        size_t len = rng() % 1000;
        std::vector<std::uint8_t> data(len);
        for (auto& b : data) b = static_cast<std::uint8_t>(rng());
        CHECK(sha256(std::span<const std::uint8_t>(data)).hex() == ref_sha256::hex_digest(data));
    }
}

TEST_CASE("digest hex round-trips") {
    digest32 d = sha256(std::string_view("roundtrip"));
    CHECK(digest32::from_hex(d.hex()) == d);
    CHECK_THROWS_AS(digest32::from_hex("xyz"), std::invalid_argument);
    CHECK_THROWS_AS(digest32::from_hex(std::string(63, 'a')), std::invalid_argument);
    CHECK_THROWS_AS(digest32::from_hex(std::string(63, 'a') + "g"), std::invalid_argument);
    CHECK(digest32{}.is_zero());
    CHECK_FALSE(d.is_zero());
}
