#include "nsm/bits.hpp"

#include "nsm/error.hpp"

namespace nsm {

Bits random_bits(std::size_t n, Rng& rng)
{
  Bits b(n);
  std::size_t i = 0;
  while (i < n) {
    auto word = rng();
    for (int k = 0; k < 64 && i < n; ++k, ++i)
      b[i] = (word >> k) & 1u;
  }
  return b;
}

std::string to_string01(const Bits& b)
{
  std::string s(b.size(), '0');
  for (std::size_t i = 0; i < b.size(); ++i)
    if (b[i])
      s[i] = '1';
  return s;
}

Bits from_string01(const std::string& s)
{
  Bits b(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '0' && s[i] != '1')
      throw DomainError("bit string must contain only 0 and 1");
    b[i] = s[i] == '1';
  }
  return b;
}

bool lex_less(const Bits& a, const Bits& b)
{
  require(a.size() == b.size(), "lex_less: size mismatch");
  const auto diff = a ^ b;
  const auto first = diff.find_first();
  if (first == Bits::npos)
    return false;
  return !a[first];
}

std::vector<std::uint8_t> pack_bits(const Bits& b)
{
  std::vector<std::uint8_t> out((b.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < b.size(); ++i)
    if (b[i])
      out[i / 8] |= std::uint8_t(1u << (i % 8));
  return out;
}

Bits unpack_bits(const std::vector<std::uint8_t>& bytes, std::size_t nbits)
{
  if (bytes.size() != (nbits + 7) / 8)
    throw ProtocolError("bit payload has wrong byte length");
  Bits b(nbits);
  for (std::size_t i = 0; i < nbits; ++i)
    b[i] = (bytes[i / 8] >> (i % 8)) & 1u;
  return b;
}

Bits select(const Bits& b, const std::vector<std::uint32_t>& positions)
{
  Bits out(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    require(positions[i] < b.size(), "select: position out of range");
    out[i] = b[positions[i]];
  }
  return out;
}

} // namespace nsm
