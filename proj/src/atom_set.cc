#include "rsl/atom_set.h"

#include <stdexcept>

namespace rsl {
std::string AtomSet::to_hex() const {
    static constexpr char digits[] = "0123456789abcdef";
    std::size_t num_bytes = (num_bits_ + 7) / 8;
    std::string out;
    out.reserve(2 * num_bytes);
    for (std::size_t b = 0; b < num_bytes; ++b) {
        unsigned byte = (words_[b / 8] >> (8 * (b % 8))) & 0xffU;
        out.push_back(digits[byte >> 4]);
        out.push_back(digits[byte & 0xf]);
    }
    return out;
}

static unsigned hex_value(char c) {
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    throw std::invalid_argument(std::string("invalid hex digit '") + c + "'");
}

AtomSet AtomSet::from_hex(const std::string &hex, std::size_t num_bits) {
    std::size_t num_bytes = (num_bits + 7) / 8;
    if (hex.size() != 2 * num_bytes)
        throw std::invalid_argument("hex bitvector has wrong length");
    AtomSet result(num_bits);
    for (std::size_t b = 0; b < num_bytes; ++b) {
        std::uint64_t byte = (hex_value(hex[2 * b]) << 4) | hex_value(hex[2 * b + 1]);
        result.words_[b / 8] |= byte << (8 * (b % 8));
    }
    if (num_bits % 64 != 0 && !result.words_.empty() &&
        (result.words_.back() >> (num_bits % 64)) != 0)
        throw std::invalid_argument("hex bitvector has bits beyond its width");
    return result;
}
}
