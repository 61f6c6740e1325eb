#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "countchain/types.hpp"

namespace countchain {

/// SHA-256 of the raw input-ID bytes. Throws CountChainError on empty input.
Digest hash_input_id(std::string_view input_id);

/// Lowercase hex, always 64 characters.
std::string to_hex(const Digest& digest);

std::optional<Digest> digest_from_hex(std::string_view hex);

struct DigestHash {
    std::size_t operator()(const Digest& d) const noexcept;
};

}  // namespace countchain
