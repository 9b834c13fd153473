#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "falcon/types.hpp"

namespace falcon {

class DecodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Big-endian writer used by every wire and canonical encoding.
class ByteWriter {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void raw(ByteView bytes) { out_.insert(out_.end(), bytes.begin(), bytes.end()); }
    /// u32 length then the bytes.
    void blob(ByteView bytes);
    void digest(const Digest& d) { raw(d.bytes); }

    const Bytes& bytes() const { return out_; }
    Bytes take() { return std::move(out_); }

private:
    Bytes out_;
};

class ByteReader {
public:
    explicit ByteReader(ByteView in) : in_(in) {}

    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    Bytes blob();
    Digest digest();

    bool done() const { return pos_ == in_.size(); }
    void expect_done() const;

private:
    ByteView take(std::size_t count);

    ByteView in_;
    std::size_t pos_ = 0;
};

std::string to_hex(ByteView bytes);
Bytes from_hex(const std::string& hex);

}  // namespace falcon
