#include "nsm/stats.hpp"

#include <algorithm>
#include <cmath>

#include "nsm/error.hpp"

namespace nsm {

double binary_entropy(double p)
{
  require(p >= 0.0 && p <= 1.0, "binary_entropy: p must lie in [0, 1]");
  if (p == 0.0 || p == 1.0)
    return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double chernoff_halfwidth(double count, double eps, Tail tail)
{
  require(count >= 1.0, "chernoff_halfwidth: need at least one trial");
  require(eps > 0.0, "chernoff_halfwidth: eps must be positive");
  const double scale = tail == Tail::two_sided ? 2.0 : 1.0;
  require(eps <= scale, "chernoff_halfwidth: eps too large for the requested tail");
  return std::sqrt(std::log(scale / eps) / (2.0 * count));
}

ConfidenceInterval chernoff_interval(double p, double count, double eps, Tail tail)
{
  return {p, chernoff_halfwidth(count, eps, tail)};
}

bool interval_contains(std::uint64_t observed, double p, double zeta, std::uint64_t M)
{
  const double m = double(M);
  // Absorb rounding in (p -/+ zeta) * M so integer boundaries stay inside.
  const double slack = 1e-9 * std::max(1.0, m);
  const double x = double(observed);
  return x >= (p - zeta) * m - slack && x <= (p + zeta) * m + slack;
}

} // namespace nsm
