#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <boost/dynamic_bitset.hpp>

namespace nsm {

using Bits = boost::dynamic_bitset<std::uint64_t>;
using Rng = std::mt19937_64;

Bits random_bits(std::size_t n, Rng& rng);

// Index 0 first, as '0'/'1' characters.
std::string to_string01(const Bits& b);
Bits from_string01(const std::string& s);

// Lexicographic order on (b[0], b[1], ...). Sizes must match.
bool lex_less(const Bits& a, const Bits& b);

// Packs bits LSB-first into bytes.
std::vector<std::uint8_t> pack_bits(const Bits& b);
Bits unpack_bits(const std::vector<std::uint8_t>& bytes, std::size_t nbits);

Bits select(const Bits& b, const std::vector<std::uint32_t>& positions);

} // namespace nsm
