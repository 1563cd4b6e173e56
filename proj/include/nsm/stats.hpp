#pragma once

#include <cstdint>

namespace nsm {

// Binary Shannon entropy in bits, with 0 log 0 = 0.
double binary_entropy(double p);

enum class Tail { two_sided, one_sided };

// Half-width of the Chernoff-Hoeffding interval for `count` Bernoulli trials
// failing with probability at most eps.
double chernoff_halfwidth(double count, double eps, Tail tail = Tail::two_sided);

struct ConfidenceInterval {
  double center;
  double halfwidth;
  double lo() const { return center - halfwidth; }
  double hi() const { return center + halfwidth; }
};

ConfidenceInterval chernoff_interval(double p, double count, double eps, Tail tail = Tail::two_sided);

// True iff (p - zeta) M <= observed <= (p + zeta) M. The boundary is inclusive.
bool interval_contains(std::uint64_t observed, double p, double zeta, std::uint64_t M);

} // namespace nsm
