#include "countchain/hash.hpp"

#include <openssl/evp.h>

#include <cstring>
#include <memory>

namespace countchain {
namespace {

struct MdDeleter {
    void operator()(EVP_MD* md) const noexcept { EVP_MD_free(md); }
};

struct CtxDeleter {
    void operator()(EVP_MD_CTX* ctx) const noexcept { EVP_MD_CTX_free(ctx); }
};

const EVP_MD* sha256() {
    static const std::unique_ptr<EVP_MD, MdDeleter> md{EVP_MD_fetch(nullptr, "SHA256", nullptr)};
    if (!md) throw std::runtime_error("SHA-256 unavailable in libcrypto");
    return md.get();
}

// One context per thread; re-initialising it is much cheaper than a fresh fetch.
EVP_MD_CTX* thread_context() {
    thread_local const std::unique_ptr<EVP_MD_CTX, CtxDeleter> ctx{EVP_MD_CTX_new()};
    if (!ctx) throw std::runtime_error("EVP_MD_CTX_new failed");
    return ctx.get();
}

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

Digest hash_input_id(std::string_view input_id) {
    if (input_id.empty()) throw CountChainError("input_id must be non-empty");
    Digest out{};
    EVP_MD_CTX* ctx = thread_context();
    unsigned int len = 0;
    if (EVP_DigestInit_ex(ctx, sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, input_id.data(), input_id.size()) != 1 ||
        EVP_DigestFinal_ex(ctx, out.data(), &len) != 1 || len != out.size()) {
        throw std::runtime_error("SHA-256 evaluation failed");
    }
    return out;
}

std::string to_hex(const Digest& digest) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string s(digest.size() * 2, '0');
    for (std::size_t i = 0; i < digest.size(); ++i) {
        s[2 * i] = kHex[digest[i] >> 4];
        s[2 * i + 1] = kHex[digest[i] & 0x0f];
    }
    return s;
}

std::optional<Digest> digest_from_hex(std::string_view hex) {
    Digest d{};
    if (hex.size() != d.size() * 2) return std::nullopt;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const int hi = hex_value(hex[2 * i]);
        const int lo = hex_value(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        d[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return d;
}

std::size_t DigestHash::operator()(const Digest& d) const noexcept {
    std::size_t h = 0;
    std::memcpy(&h, d.data(), sizeof h);
    return h;
}

}  // namespace countchain
