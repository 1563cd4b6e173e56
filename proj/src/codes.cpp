#include "nsm/codes.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <boost/multiprecision/cpp_int.hpp>

#include "nsm/error.hpp"
#include "nsm/stats.hpp"

namespace nsm {

using boost::multiprecision::cpp_int;

namespace {

cpp_int binomial(int n, int k)
{
  if (k < 0 || k > n)
    return 0;
  k = std::min(k, n - k);
  cpp_int c = 1;
  for (int i = 1; i <= k; ++i)
    c = c * (n - k + i) / i;
  return c;
}

int floor_log2(const cpp_int& v) { return v > 0 ? static_cast<int>(boost::multiprecision::msb(v)) : -1; }

// w[0] is the most significant bit so numeric order matches lexicographic order.
cpp_int to_integer(const Bits& w)
{
  cpp_int v = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    v <<= 1;
    if (w[i])
      v |= 1;
  }
  return v;
}

Bits from_integer(cpp_int v, int t)
{
  Bits w(t);
  for (int i = t - 1; i >= 0; --i) {
    w[i] = static_cast<bool>(v & 1);
    v >>= 1;
  }
  return w;
}

bool parity(const Bits& b) { return b.count() & 1u; }

} // namespace

// ---------------------------------------------------------------------------
// Subset encoding

SubsetEncoding SubsetEncoding::for_universe(int alpha)
{
  require(alpha >= 4 && alpha % 4 == 0, "alpha must be a positive multiple of 4");
  return SubsetEncoding(alpha, floor_log2(binomial(alpha, alpha / 4)));
}

SubsetEncoding::SubsetEncoding(int alpha, int t) : alpha_(alpha), t_(t)
{
  require(alpha >= 4 && alpha % 4 == 0, "alpha must be a positive multiple of 4");
  require(t >= 1 && t <= floor_log2(binomial(alpha, alpha / 4)),
          "t must satisfy 1 <= t and 2^t <= C(alpha, alpha/4)");
}

std::vector<int> SubsetEncoding::encode(const Bits& w) const
{
  require(static_cast<int>(w.size()) == t_, "encode: input must have t bits");
  cpp_int x = to_integer(w);
  const int k = subset_size();
  std::vector<int> out;
  out.reserve(k);
  int c = 0;
  for (int pos = 0; pos < k; ++pos) {
    for (;; ++c) {
      const cpp_int count = binomial(alpha_ - 1 - c, k - 1 - pos);
      if (x < count) {
        out.push_back(c++);
        break;
      }
      x -= count;
    }
  }
  return out;
}

Bits SubsetEncoding::decode(std::span<const int> subset) const
{
  const int k = subset_size();
  require(static_cast<int>(subset.size()) == k, "decode: subset has the wrong size");
  cpp_int x = 0;
  int start = 0;
  for (int pos = 0; pos < k; ++pos) {
    const int s = subset[pos];
    require(s >= start && s < alpha_, "decode: subset must be strictly increasing within the universe");
    for (int c = start; c < s; ++c)
      x += binomial(alpha_ - 1 - c, k - 1 - pos);
    start = s + 1;
  }
  require(x < (cpp_int(1) << t_), "decode: subset is not in the image of the encoding");
  return from_integer(x, t_);
}

// ---------------------------------------------------------------------------
// Interactive hashing

HashingAlice::HashingAlice(int t, Rng& rng) : t_(t), rng_(&rng)
{
  require(t >= 2, "interactive hashing needs t >= 2");
}

Bits HashingAlice::next_query()
{
  if (done())
    throw ProtocolError("all queries already sent");
  if (answers_.size() != queries_.size())
    throw ProtocolError("previous query is still unanswered");
  for (;;) {
    const Bits q = random_bits(t_, *rng_);
    Bits reduced = q;
    for (std::size_t i = 0; i < basis_.size(); ++i)
      if (reduced[pivots_[i]])
        reduced ^= basis_[i];
    if (reduced.none())
      continue;
    pivots_.push_back(static_cast<int>(reduced.find_first()));
    basis_.push_back(std::move(reduced));
    queries_.push_back(q);
    return q;
  }
}

void HashingAlice::receive_answer(bool bit)
{
  if (answers_.size() + 1 != queries_.size())
    throw ProtocolError("answer without an outstanding query");
  answers_.push_back(bit);
}

std::pair<Bits, Bits> HashingAlice::outputs() const
{
  if (!done() || answers_.size() != queries_.size())
    throw ProtocolError("interactive hashing has not finished");
  return solve_parities(t_, queries_, answers_);
}

bool HashingBob::answer(const Bits& query)
{
  if (query.size() != w_.size())
    throw ProtocolError("query length does not match the input length");
  return parity(query & w_);
}

std::pair<Bits, Bits> solve_parities(int t, const std::vector<Bits>& rows, const std::vector<bool>& rhs)
{
  require(rows.size() == rhs.size(), "solve_parities: row and value counts differ");
  std::vector<Bits> a = rows;
  std::vector<bool> b = rhs;
  for (const auto& r : a)
    require(static_cast<int>(r.size()) == t, "solve_parities: row length must be t");
  std::vector<int> pivot_col;
  int rank = 0;
  for (int col = 0; col < t && rank < static_cast<int>(a.size()); ++col) {
    int piv = -1;
    for (int r = rank; r < static_cast<int>(a.size()); ++r)
      if (a[r][col]) {
        piv = r;
        break;
      }
    if (piv < 0)
      continue;
    std::swap(a[rank], a[piv]);
    std::vector<bool>::swap(b[rank], b[piv]);
    for (int r = 0; r < static_cast<int>(a.size()); ++r)
      if (r != rank && a[r][col]) {
        a[r] ^= a[rank];
        b[r] = b[r] != b[rank];
      }
    pivot_col.push_back(col);
    ++rank;
  }
  if (rank != t - 1)
    throw ProtocolError("parity queries do not have rank t - 1");
  int free_col = -1;
  for (int col = 0, k = 0; col < t; ++col) {
    if (k < rank && pivot_col[k] == col)
      ++k;
    else
      free_col = col;
  }
  auto solution = [&](bool free_value) {
    Bits w(t);
    w[free_col] = free_value;
    for (int k = 0; k < rank; ++k)
      w[pivot_col[k]] = b[k] != (free_value && a[k][free_col]);
    return w;
  };
  Bits w0 = solution(false), w1 = solution(true);
  if (lex_less(w1, w0))
    std::swap(w0, w1);
  return {w0, w1};
}

// ---------------------------------------------------------------------------
// Linear codes

struct LinearCode::Segment {
  int n = 0;
  int r = 0;
  int radius = 0;
  std::vector<std::uint64_t> columns;   // syndrome of each unit vector
  std::unordered_map<std::uint64_t, std::vector<int>> leaders;
};

std::shared_ptr<const LinearCode::Segment> LinearCode::make_segment(std::vector<std::uint64_t> columns, int r,
                                                                    int radius)
{
  require(r >= 0 && r <= 64, "syndrome length per segment must be at most 64");
  auto seg = std::make_shared<Segment>();
  seg->n = static_cast<int>(columns.size());
  seg->r = r;
  seg->radius = radius;
  seg->columns = std::move(columns);
  std::vector<int> pattern;
  bool unique = true;
  // Enumerate every error pattern of weight <= radius with its syndrome.
  auto walk = [&](auto&& self, int from, std::uint64_t s) -> void {
    if (!unique)
      return;
    if (!seg->leaders.emplace(s, pattern).second) {
      unique = false;
      return;
    }
    if (static_cast<int>(pattern.size()) == radius)
      return;
    for (int j = from; j < seg->n; ++j) {
      pattern.push_back(j);
      self(self, j + 1, s ^ seg->columns[j]);
      pattern.pop_back();
    }
  };
  walk(walk, 0, 0);
  return unique ? seg : nullptr;
}

LinearCode LinearCode::single(std::shared_ptr<const Segment> seg)
{
  LinearCode c;
  c.n_ = seg->n;
  c.syndrome_len_ = seg->r;
  c.parts_.push_back({std::move(seg), 0, 0});
  return c;
}

LinearCode LinearCode::trivial(int n)
{
  require(n >= 1, "code length must be positive");
  return single(make_segment(std::vector<std::uint64_t>(n, 0), 0, 0));
}

LinearCode LinearCode::hamming(int r)
{
  require(r >= 2 && r <= 20, "Hamming parameter r must lie in [2, 20]");
  return shortened_hamming(r, (1 << r) - 1);
}

LinearCode LinearCode::shortened_hamming(int r, int n)
{
  require(r >= 2 && r <= 20, "Hamming parameter r must lie in [2, 20]");
  require(n >= 1 && n <= (1 << r) - 1, "shortened Hamming length must lie in [1, 2^r - 1]");
  std::vector<std::uint64_t> cols(n);
  for (int j = 0; j < n; ++j)
    cols[j] = std::uint64_t(j + 1);
  return single(make_segment(std::move(cols), r, 1));
}

LinearCode LinearCode::extended_hamming(int r)
{
  require(r >= 2 && r <= 20, "Hamming parameter r must lie in [2, 20]");
  const int n = 1 << r;
  std::vector<std::uint64_t> cols(n);
  for (int j = 0; j < n; ++j)
    cols[j] = std::uint64_t(j) | (std::uint64_t(1) << r);
  return single(make_segment(std::move(cols), r + 1, 1));
}

LinearCode LinearCode::lookup(int n, int radius, Rng& rng)
{
  require(n >= 1 && radius >= 0 && radius <= n, "lookup code needs n >= 1 and 0 <= radius <= n");
  double patterns = 0;
  for (int w = 0; w <= radius; ++w)
    patterns += std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(w + 1.0) - std::lgamma(n - w + 1.0)));
  require(patterns <= 4e6, "lookup code table would be too large");
  const int r0 = std::max(0, static_cast<int>(std::ceil(std::log2(patterns) - 1e-9)));
  for (int r = r0; r <= 64; ++r) {
    const std::uint64_t mask = r == 64 ? ~std::uint64_t(0) : (std::uint64_t(1) << r) - 1;
    for (int attempt = 0; attempt < 32; ++attempt) {
      std::vector<std::uint64_t> cols(n);
      for (auto& c : cols) {
        do
          c = rng() & mask;
        while (c == 0 && r > 0);
      }
      if (auto seg = make_segment(std::move(cols), r, radius))
        return single(std::move(seg));
    }
  }
  throw DomainError("no lookup code found");
}

LinearCode LinearCode::block_product(const LinearCode& inner, int copies)
{
  require(copies >= 1, "block product needs at least one copy");
  return concatenate(std::vector<LinearCode>(copies, inner));
}

LinearCode LinearCode::concatenate(const std::vector<LinearCode>& parts)
{
  require(!parts.empty(), "concatenate needs at least one code");
  LinearCode c;
  for (const auto& p : parts)
    for (const auto& part : p.parts_) {
      c.parts_.push_back({part.seg, c.n_, c.syndrome_len_});
      c.n_ += part.seg->n;
      c.syndrome_len_ += part.seg->r;
    }
  return c;
}

LinearCode LinearCode::for_error_rate(int n, double p_err, double overhead)
{
  require(n >= 1, "code length must be positive");
  require(p_err >= 0.0 && p_err <= 0.5, "p_err must lie in [0, 1/2]");
  if (p_err == 0.0)
    return trivial(n);
  const double target = overhead * binary_entropy(p_err);
  auto bits_for = [](int len) { return std::max(2, static_cast<int>(std::ceil(std::log2(len + 1.0)))); };
  // Shortest blocks (most correction per bit) whose total syndrome rate meets the target.
  for (int len = 3; len <= std::min(n, (1 << 20) - 1); ++len) {
    if (double(bits_for(len)) / len > target)
      continue;
    const int blocks = (n + len - 1) / len;
    int total = 0;
    std::vector<LinearCode> parts;
    for (int b = 0; b < blocks; ++b) {
      const int size = n / blocks + (b < n % blocks ? 1 : 0);
      total += bits_for(size);
      parts.push_back(shortened_hamming(bits_for(size), size));
    }
    if (double(total) / n <= target)
      return concatenate(parts);
  }
  if (n >= 4 && n <= 16 && (n & (n - 1)) == 0)
    return extended_hamming(static_cast<int>(std::log2(n)));
  return shortened_hamming(bits_for(n), n);
}

int LinearCode::decode_radius() const
{
  int r = parts_.empty() ? 0 : parts_.front().seg->radius;
  for (const auto& p : parts_)
    if (p.seg->r > 0)
      r = std::min(r, p.seg->radius);
  return r;
}

Bits LinearCode::syndrome(const Bits& x) const
{
  require(static_cast<int>(x.size()) == n_, "syndrome: input length does not match the code");
  Bits s(syndrome_len_);
  for (const auto& p : parts_) {
    std::uint64_t v = 0;
    for (int j = 0; j < p.seg->n; ++j)
      if (x[p.offset + j])
        v ^= p.seg->columns[j];
    for (int b = 0; b < p.seg->r; ++b)
      s[p.syndrome_offset + b] = (v >> b) & 1u;
  }
  return s;
}

LinearCode::Decoded LinearCode::decode(const Bits& y, const Bits& s) const
{
  require(static_cast<int>(y.size()) == n_, "decode: word length does not match the code");
  require(static_cast<int>(s.size()) == syndrome_len_, "decode: syndrome length does not match the code");
  Decoded out{y, true};
  for (const auto& p : parts_) {
    std::uint64_t v = 0;
    for (int j = 0; j < p.seg->n; ++j)
      if (y[p.offset + j])
        v ^= p.seg->columns[j];
    for (int b = 0; b < p.seg->r; ++b)
      if (s[p.syndrome_offset + b])
        v ^= std::uint64_t(1) << b;
    const auto it = p.seg->leaders.find(v);
    if (it == p.seg->leaders.end()) {
      out.ok = false;
      continue;
    }
    for (int j : it->second)
      out.x.flip(p.offset + j);
  }
  return out;
}

std::vector<Bits> LinearCode::parity_rows() const
{
  std::vector<Bits> rows(syndrome_len_, Bits(n_));
  for (const auto& p : parts_)
    for (int b = 0; b < p.seg->r; ++b)
      for (int j = 0; j < p.seg->n; ++j)
        if ((p.seg->columns[j] >> b) & 1u)
          rows[p.syndrome_offset + b].set(p.offset + j);
  return rows;
}

// ---------------------------------------------------------------------------
// Two-universal hashing

HashSeed HashSeed::random(int k, int ell, Rng& rng)
{
  require(k >= 1 && ell >= 1, "hash dimensions must be positive");
  return {random_bits(std::size_t(k + ell - 1), rng), k, ell};
}

Bits extract(const Bits& x, const HashSeed& seed)
{
  require(static_cast<int>(x.size()) == seed.k, "extract: input length does not match the seed");
  require(static_cast<int>(seed.bits.size()) == seed.k + seed.ell - 1, "extract: seed has the wrong length");
  // Row i of the Toeplitz matrix, read right to left, is seed[i .. i+k-1].
  Bits reversed(seed.k);
  for (int j = 0; j < seed.k; ++j)
    reversed[seed.k - 1 - j] = x[j];
  Bits out(seed.ell);
  Bits window = seed.bits;
  for (int i = 0; i < seed.ell; ++i) {
    Bits row = window;
    row.resize(seed.k);
    out[i] = parity(row & reversed);
    window >>= 1;
  }
  return out;
}

} // namespace nsm
