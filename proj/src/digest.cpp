#include "cpseq/digest.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cstring>
#include <stdexcept>

namespace cpseq {

Digest Digest::of(std::string_view data) {
    Digest out;
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr ||
        EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx, out.bytes_.data(), &len) != 1 || len != kSize) {
        EVP_MD_CTX_free(ctx);
        throw std::runtime_error("sha256 computation failed");
    }
    EVP_MD_CTX_free(ctx);
    return out;
}

namespace {
constexpr char kHexDigits[] = "0123456789abcdef";

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}
}  // namespace

std::optional<Digest> Digest::from_hex(std::string_view hex) {
    if (hex.size() != 2 * kSize) return std::nullopt;
    Digest out;
    for (std::size_t i = 0; i < kSize; ++i) {
        int hi = hex_value(hex[2 * i]);
        int lo = hex_value(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        out.bytes_[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
}

std::string Digest::hex() const {
    std::string out(2 * kSize, '0');
    for (std::size_t i = 0; i < kSize; ++i) {
        out[2 * i] = kHexDigits[bytes_[i] >> 4];
        out[2 * i + 1] = kHexDigits[bytes_[i] & 0x0f];
    }
    return out;
}

bool Digest::is_zero() const {
    for (auto b : bytes_) {
        if (b != 0) return false;
    }
    return true;
}

FieldWriter& FieldWriter::field(std::string_view bytes) {
    buffer_ += std::to_string(bytes.size());
    buffer_ += ':';
    buffer_.append(bytes.data(), bytes.size());
    buffer_ += ';';
    return *this;
}

FieldWriter& FieldWriter::field_u64(std::uint64_t value) {
    return field(std::to_string(value));
}

FieldWriter& FieldWriter::field_digest(const Digest& digest) {
    return field(digest.hex());
}

std::optional<std::string> FieldReader::field() {
    std::size_t colon = data_.find(':', pos_);
    if (colon == std::string_view::npos || colon == pos_) return std::nullopt;
    std::size_t len = 0;
    auto [ptr, ec] = std::from_chars(data_.data() + pos_, data_.data() + colon, len);
    if (ec != std::errc{} || ptr != data_.data() + colon) return std::nullopt;
    std::size_t start = colon + 1;
    if (start + len + 1 > data_.size() || data_[start + len] != ';') return std::nullopt;
    std::string out(data_.substr(start, len));
    pos_ = start + len + 1;
    return out;
}

std::optional<std::uint64_t> FieldReader::field_u64() {
    auto raw = field();
    if (!raw) return std::nullopt;
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(raw->data(), raw->data() + raw->size(), value);
    if (ec != std::errc{} || ptr != raw->data() + raw->size()) return std::nullopt;
    return value;
}

std::optional<Digest> FieldReader::field_digest() {
    auto raw = field();
    if (!raw) return std::nullopt;
    return Digest::from_hex(*raw);
}

}  // namespace cpseq
