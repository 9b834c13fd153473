#include "falcon/codec.hpp"

namespace falcon {

void ByteWriter::u32(std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
}

void ByteWriter::u64(std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
}

void ByteWriter::blob(ByteView bytes) {
    u32(static_cast<std::uint32_t>(bytes.size()));
    raw(bytes);
}

ByteView ByteReader::take(std::size_t count) {
    if (in_.size() - pos_ < count) throw DecodeError("truncated input");
    auto view = in_.subspan(pos_, count);
    pos_ += count;
    return view;
}

std::uint8_t ByteReader::u8() { return take(1)[0]; }

std::uint32_t ByteReader::u32() {
    std::uint32_t v = 0;
    for (auto b : take(4)) v = (v << 8) | b;
    return v;
}

std::uint64_t ByteReader::u64() {
    std::uint64_t v = 0;
    for (auto b : take(8)) v = (v << 8) | b;
    return v;
}

Bytes ByteReader::blob() {
    auto len = u32();
    auto view = take(len);
    return Bytes(view.begin(), view.end());
}

Digest ByteReader::digest() {
    Digest d;
    auto view = take(d.bytes.size());
    std::copy(view.begin(), view.end(), d.bytes.begin());
    return d;
}

void ByteReader::expect_done() const {
    if (!done()) throw DecodeError("trailing bytes");
}

std::string to_hex(ByteView bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

Bytes from_hex(const std::string& hex) {
    if (hex.size() % 2 != 0) throw DecodeError("odd-length hex");
    auto nibble = [](char c) -> std::uint8_t {
        if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
        if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
        if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
        throw DecodeError("bad hex digit");
    };
    Bytes out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2)
        out.push_back(static_cast<std::uint8_t>((nibble(hex[i]) << 4) | nibble(hex[i + 1])));
    return out;
}

}  // namespace falcon
