#pragma once

#include "digest.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace opssc {

// Thrown on any malformed canonical encoding (truncation, bad lengths,
// trailing bytes). Decoders must fail cleanly on arbitrary corrupt input.
struct encoding_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Canonical byte layout used for every hashed or dumped structure:
// fixed-width little-endian integers and u32-length-prefixed byte strings,
// fields concatenated in declaration order. See docs/encoding.md.
class byte_writer {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }

    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }

    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }

    void raw(std::span<const std::uint8_t> data) { buf_.insert(buf_.end(), data.begin(), data.end()); }

    void lp(std::string_view s) {
        u32(static_cast<std::uint32_t>(s.size()));
        buf_.insert(buf_.end(), s.begin(), s.end());
    }

    void dig(const digest32& d) { buf_.insert(buf_.end(), d.bytes.begin(), d.bytes.end()); }

    const std::vector<std::uint8_t>& data() const { return buf_; }
    std::vector<std::uint8_t> take() { return std::move(buf_); }

private:
    std::vector<std::uint8_t> buf_;
};

class byte_reader {
public:
    explicit byte_reader(std::span<const std::uint8_t> data) : data_(data) {}

    std::uint8_t u8() {
        need(1);
        return data_[pos_++];
    }

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_++]) << (8 * i);
        return v;
    }

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_++]) << (8 * i);
        return v;
    }

    std::string lp() {
        std::uint32_t n = u32();
        need(n);
        std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
        pos_ += n;
        return s;
    }

    digest32 dig() {
        need(32);
        digest32 d;
        std::copy(data_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  data_.begin() + static_cast<std::ptrdiff_t>(pos_) + 32, d.bytes.begin());
        pos_ += 32;
        return d;
    }

    std::vector<std::uint8_t> raw(size_t n) {
        need(n);
        std::vector<std::uint8_t> out(data_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                      data_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
        pos_ += n;
        return out;
    }

    size_t remaining() const { return data_.size() - pos_; }
    bool at_end() const { return pos_ == data_.size(); }

    void expect_end() const {
        if (!at_end()) throw encoding_error("trailing bytes after canonical encoding");
    }

private:
    void need(size_t n) const {
        if (data_.size() - pos_ < n) throw encoding_error("truncated canonical encoding");
    }

    std::span<const std::uint8_t> data_;
    size_t pos_ = 0;
};

} // namespace opssc
