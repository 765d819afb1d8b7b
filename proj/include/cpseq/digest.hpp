#pragma once
// SHA-256 digests and the canonical field encoding used everywhere a
// deterministic byte representation is hashed or put on the wire.

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace cpseq {

class Digest {
public:
    static constexpr std::size_t kSize = 32;

    Digest() : bytes_{} {}  // zero digest

    static Digest zero() { return Digest{}; }
    static Digest of(std::string_view data);
    static std::optional<Digest> from_hex(std::string_view hex);

    std::string hex() const;  // lowercase
    bool is_zero() const;
    const std::array<std::uint8_t, kSize>& bytes() const { return bytes_; }

    auto operator<=>(const Digest&) const = default;

private:
    std::array<std::uint8_t, kSize> bytes_;
};

// Hash adaptor for unordered containers; digest bytes are uniform, so
// the leading bytes suffice.
struct DigestHash {
    std::size_t operator()(const Digest& digest) const {
        std::size_t out = 0;
        for (std::size_t i = 0; i < sizeof(out); ++i) {
            out = (out << 8) | digest.bytes()[i];
        }
        return out;
    }
};

// Canonical record encoding: each field is written as
//   <decimal byte length> ':' <bytes> ';'
// and a record is the concatenation of its fields in a fixed order.
// Unambiguous for arbitrary field content, so the same bytes serve both
// for hashing and for wire transport.
class FieldWriter {
public:
    FieldWriter& field(std::string_view bytes);
    FieldWriter& field_u64(std::uint64_t value);
    FieldWriter& field_digest(const Digest& digest);  // hex form

    const std::string& str() const { return buffer_; }
    Digest digest() const { return Digest::of(buffer_); }

private:
    std::string buffer_;
};

// Reads fields written by FieldWriter. Returns nullopt on malformed input.
class FieldReader {
public:
    explicit FieldReader(std::string_view data) : data_(data) {}

    std::optional<std::string> field();
    std::optional<std::uint64_t> field_u64();
    std::optional<Digest> field_digest();
    bool at_end() const { return pos_ == data_.size(); }
    std::size_t position() const { return pos_; }

private:
    std::string_view data_;
    std::size_t pos_ = 0;
};

}  // namespace cpseq
