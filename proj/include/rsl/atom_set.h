#ifndef RSL_ATOM_SET_H
#define RSL_ATOM_SET_H

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace rsl {
using AtomId = std::uint32_t;
using ActionId = std::uint32_t;

/*
  Fixed-width bitvector over atom ids. Every set in a grounded task (states,
  pre-images, action pre/add/del lists, mutex rows) uses this type so that
  subset and intersection tests cost O(|F| / 64).
*/
class AtomSet {
    std::size_t num_bits_ = 0;
    std::vector<std::uint64_t> words_;

    static constexpr std::size_t word_count(std::size_t bits) {
        return (bits + 63) / 64;
    }

public:
    AtomSet() = default;
    explicit AtomSet(std::size_t num_bits)
        : num_bits_(num_bits), words_(word_count(num_bits), 0) {
    }
    AtomSet(std::size_t num_bits, const std::vector<AtomId> &ids)
        : AtomSet(num_bits) {
        for (AtomId id : ids)
            set(id);
    }

    std::size_t width() const {return num_bits_;}

    bool test(AtomId id) const {
        return (words_[id >> 6] >> (id & 63)) & 1U;
    }
    void set(AtomId id) {
        words_[id >> 6] |= std::uint64_t{1} << (id & 63);
    }
    void reset(AtomId id) {
        words_[id >> 6] &= ~(std::uint64_t{1} << (id & 63));
    }
    void assign(AtomId id, bool value) {
        if (value)
            set(id);
        else
            reset(id);
    }
    void clear() {
        std::fill(words_.begin(), words_.end(), 0);
    }
    void fill() {
        std::fill(words_.begin(), words_.end(), ~std::uint64_t{0});
        trim();
    }

    std::size_t count() const {
        std::size_t n = 0;
        for (std::uint64_t w : words_)
            n += std::popcount(w);
        return n;
    }
    bool none() const {
        for (std::uint64_t w : words_)
            if (w)
                return false;
        return true;
    }
    bool any() const {return !none();}

    bool is_subset_of(const AtomSet &other) const {
        for (std::size_t i = 0; i < words_.size(); ++i)
            if (words_[i] & ~other.words_[i])
                return false;
        return true;
    }
    bool intersects(const AtomSet &other) const {
        for (std::size_t i = 0; i < words_.size(); ++i)
            if (words_[i] & other.words_[i])
                return true;
        return false;
    }
    // |this \ other|
    std::size_t count_difference(const AtomSet &other) const {
        std::size_t n = 0;
        for (std::size_t i = 0; i < words_.size(); ++i)
            n += std::popcount(words_[i] & ~other.words_[i]);
        return n;
    }

    AtomSet &operator|=(const AtomSet &other) {
        for (std::size_t i = 0; i < words_.size(); ++i)
            words_[i] |= other.words_[i];
        return *this;
    }
    AtomSet &operator&=(const AtomSet &other) {
        for (std::size_t i = 0; i < words_.size(); ++i)
            words_[i] &= other.words_[i];
        return *this;
    }
    AtomSet &subtract(const AtomSet &other) {
        for (std::size_t i = 0; i < words_.size(); ++i)
            words_[i] &= ~other.words_[i];
        return *this;
    }

    friend AtomSet operator|(AtomSet lhs, const AtomSet &rhs) {return lhs |= rhs;}
    friend AtomSet operator&(AtomSet lhs, const AtomSet &rhs) {return lhs &= rhs;}
    friend AtomSet difference(AtomSet lhs, const AtomSet &rhs) {return lhs.subtract(rhs);}

    friend bool operator==(const AtomSet &, const AtomSet &) = default;

    // Ascending ids of the set bits.
    std::vector<AtomId> ids() const {
        std::vector<AtomId> result;
        for_each([&](AtomId id) {result.push_back(id);});
        return result;
    }

    template<typename Fn>
    void for_each(Fn &&fn) const {
        for (std::size_t w = 0; w < words_.size(); ++w) {
            std::uint64_t bits = words_[w];
            while (bits) {
                int offset = std::countr_zero(bits);
                fn(static_cast<AtomId>(w * 64 + offset));
                bits &= bits - 1;
            }
        }
    }

    const std::vector<std::uint64_t> &words() const {return words_;}

    // Lower-case hex, one byte at a time; atom 0 is the least significant
    // bit of the first byte.
    std::string to_hex() const;
    static AtomSet from_hex(const std::string &hex, std::size_t num_bits);

    std::size_t hash() const {
        std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ num_bits_;
        for (std::uint64_t w : words_) {
            h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return static_cast<std::size_t>(h);
    }

private:
    void trim() {
        if (num_bits_ % 64 != 0 && !words_.empty())
            words_.back() &= (std::uint64_t{1} << (num_bits_ % 64)) - 1;
    }
};

struct AtomSetHash {
    std::size_t operator()(const AtomSet &s) const {return s.hash();}
};
}

#endif
