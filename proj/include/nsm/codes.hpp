#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "nsm/bits.hpp"

namespace nsm {

// Injective map from t-bit strings to (alpha/4)-subsets of {0, ..., alpha-1},
// by rank in the lexicographic order of subsets.
class SubsetEncoding {
public:
  // Largest t with 2^t <= C(alpha, alpha/4).
  static SubsetEncoding for_universe(int alpha);
  SubsetEncoding(int alpha, int t);

  int alpha() const { return alpha_; }
  int subset_size() const { return alpha_ / 4; }
  int t() const { return t_; }

  std::vector<int> encode(const Bits& w) const;   // sorted
  Bits decode(std::span<const int> subset) const;

private:
  int alpha_;
  int t_;
};

// Two-party protocol fixing two t-bit strings, one of which is Bob's input.
class HashingAlice {
public:
  HashingAlice(int t, Rng& rng);
  bool done() const { return static_cast<int>(queries_.size()) == t_ - 1; }
  // Next query, linearly independent of the previous ones.
  Bits next_query();
  void receive_answer(bool bit);
  std::pair<Bits, Bits> outputs() const;

private:
  int t_;
  Rng* rng_;
  std::vector<Bits> queries_;
  std::vector<bool> answers_;
  std::vector<Bits> basis_;       // reduced rows for independence checks
  std::vector<int> pivots_;
};

class HashingBob {
public:
  explicit HashingBob(Bits w) : w_(std::move(w)) {}
  bool answer(const Bits& query);
  const Bits& input() const { return w_; }

private:
  Bits w_;
};

// Both solutions of the t-1 parity equations, ordered lexicographically.
std::pair<Bits, Bits> solve_parities(int t, const std::vector<Bits>& rows, const std::vector<bool>& rhs);

// Binary linear code decoded from a syndrome. Built from independent segments;
// each segment is decoded by a coset-leader table.
class LinearCode {
public:
  static LinearCode trivial(int n);
  static LinearCode hamming(int r);
  static LinearCode extended_hamming(int r);
  static LinearCode shortened_hamming(int r, int n);
  // Random parity checks, smallest size for which every pattern of weight <= radius
  // has a unique syndrome.
  static LinearCode lookup(int n, int radius, Rng& rng);
  static LinearCode block_product(const LinearCode& inner, int copies);
  static LinearCode concatenate(const std::vector<LinearCode>& parts);
  // Blocks of shortened Hamming codes with syndrome rate at most overhead * h(p_err)
  // where possible. Empty syndrome for p_err = 0.
  static LinearCode for_error_rate(int n, double p_err, double overhead = 1.2);

  int n() const { return n_; }
  int syndrome_length() const { return syndrome_len_; }
  int decode_radius() const;
  double syndrome_rate() const { return n_ ? double(syndrome_len_) / n_ : 0.0; }

  Bits syndrome(const Bits& x) const;
  std::vector<Bits> parity_rows() const;

  struct Decoded {
    Bits x;
    bool ok;   // every segment's syndrome difference was in its table
  };
  Decoded decode(const Bits& y, const Bits& syndrome) const;

private:
  struct Segment;
  struct Part {
    std::shared_ptr<const Segment> seg;
    int offset;
    int syndrome_offset;
  };
  std::vector<Part> parts_;
  int n_ = 0;
  int syndrome_len_ = 0;

  static LinearCode single(std::shared_ptr<const Segment> seg);
  static std::shared_ptr<const Segment> make_segment(std::vector<std::uint64_t> columns, int r, int radius);
};

// Toeplitz two-universal hash from k bits to ell bits, seeded by k + ell - 1 bits.
struct HashSeed {
  Bits bits;
  int k = 0;
  int ell = 0;

  static HashSeed random(int k, int ell, Rng& rng);
};

Bits extract(const Bits& x, const HashSeed& seed);

} // namespace nsm
