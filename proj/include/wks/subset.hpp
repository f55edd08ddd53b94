#pragma once

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <string>

#include "error.hpp"

namespace wks {

using mask_t = std::uint32_t;

inline constexpr int max_servers = 20;

// Servers are numbered 1..k; server i lives in bit i-1.
constexpr mask_t element_bit(int i) noexcept { return mask_t{1} << (i - 1); }

// [m] = {1, ..., m}
constexpr mask_t full_mask(int m) noexcept { return m <= 0 ? 0 : (mask_t{1} << m) - 1; }

constexpr bool has_element(mask_t s, int i) noexcept { return (s & element_bit(i)) != 0; }

// Smallest server not in s (may be k+1 when s = [k]).
constexpr int lowest_missing(mask_t s) noexcept { return std::countr_one(s) + 1; }

// Largest server in s; 0 for the empty set.
constexpr int highest_element(mask_t s) noexcept { return s == 0 ? 0 : std::bit_width(s); }

constexpr int cardinality(mask_t s) noexcept { return std::popcount(s); }

// A subset of [k] together with its ambient dimension.
class SubsetMask {
public:
    constexpr SubsetMask() = default;

    SubsetMask(mask_t bits, int k) : bits_(bits), k_(k)
    {
        detail::require(k >= 1 && k <= max_servers, "subset dimension must be in [1, 20]");
        detail::require(bits < (mask_t{1} << k), "subset mask has bits beyond k");
    }

    static SubsetMask of(std::initializer_list<int> elements, int k)
    {
        mask_t bits = 0;
        for (int i : elements) {
            detail::require(i >= 1 && i <= k, "subset element out of range");
            bits |= element_bit(i);
        }
        return SubsetMask(bits, k);
    }

    constexpr mask_t bits() const noexcept { return bits_; }
    constexpr int dimension() const noexcept { return k_; }
    constexpr bool contains(int i) const noexcept { return has_element(bits_, i); }
    constexpr int size() const noexcept { return cardinality(bits_); }

    friend constexpr bool operator==(const SubsetMask&, const SubsetMask&) = default;

private:
    mask_t bits_ = 0;
    int k_ = 1;
};

// Co-lex order: S precedes T iff some i in T\S has S and T agreeing on
// every element above i. That is the same as comparing the masks as
// unsigned integers; the definition is evaluated literally here so tests
// can check the two against each other.
inline bool colex_precedes(const SubsetMask& a, const SubsetMask& b)
{
    if (a.dimension() != b.dimension())
        throw InvalidArgument("colex_precedes: dimension mismatch");
    for (int i = a.dimension(); i >= 1; --i) {
        bool in_a = a.contains(i), in_b = b.contains(i);
        if (in_a != in_b)
            return in_b;
    }
    return false;
}

// "{1,3}" style rendering, 1-based.
inline std::string to_string(mask_t s)
{
    std::string out = "{";
    bool first = true;
    for (int i = 1; s >> (i - 1); ++i) {
        if (!has_element(s, i))
            continue;
        if (!first)
            out += ',';
        out += std::to_string(i);
        first = false;
    }
    return out + "}";
}

} // namespace wks
