#ifndef RSL_SHA256_H
#define RSL_SHA256_H

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace rsl {
using Sha256Digest = std::array<std::uint8_t, 32>;

Sha256Digest sha256(std::string_view bytes);
std::string sha256_hex(std::string_view bytes);
std::string to_hex(const Sha256Digest &digest);
}

#endif
