#include "nsm/storage.hpp"

#include <algorithm>
#include <cmath>

#include "nsm/error.hpp"

namespace nsm {

namespace {

void check_channel(int d, double r)
{
  require(d >= 2, "memory dimension d must be at least 2");
  require(std::isfinite(r) && r >= 0.0 && r <= 1.0, "depolarizing parameter r must lie in [0, 1]");
}

double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

template <class F>
std::pair<double, double> golden_max(F f, double a, double b, double tol)
{
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

} // namespace

double depolarizing_capacity(int d, double r)
{
  check_channel(d, r);
  const double big = r + (1.0 - r) / d;
  const double small = (1.0 - r) / d;
  return std::max(0.0, std::log2(double(d)) + xlog2x(big) + (d - 1) * xlog2x(small));
}

DepolarizingChannel::DepolarizingChannel(int d, double r, GammaOptions opts)
  : d_(d), r_(r), opts_(opts), capacity_(depolarizing_capacity(d, r))
{
  require(opts.alpha_max > 1.0, "alpha_max must exceed 1");
  require(opts.grid_points >= 8, "grid_points must be at least 8");
}

double DepolarizingChannel::renyi_entropy(double alpha) const
{
  const double big = r_ + (1.0 - r_) / d_;
  const double small = (1.0 - r_) / d_;
  if (std::abs(alpha - 1.0) < 1e-9)
    return -xlog2x(big) - (d_ - 1) * xlog2x(small);
  if (small == 0.0)
    return 0.0;
  // log2(big^a + (d-1) small^a) / (1 - a), factored to avoid underflow at large a.
  const double ratio = std::pow(small / big, alpha);
  return (alpha * std::log2(big) + std::log2(1.0 + (d_ - 1) * ratio)) / (1.0 - alpha);
}

double DepolarizingChannel::converse_objective(double rate, double alpha) const
{
  return (alpha - 1.0) / alpha * (rate - std::log2(double(d_)) + renyi_entropy(alpha));
}

double DepolarizingChannel::gamma(double rate) const
{
  require(std::isfinite(rate) && rate >= 0.0, "storage rate must be non-negative");
  if (rate <= capacity_ + 1e-12)
    return 0.0;
  auto f = [&](double t) { return converse_objective(rate, std::exp(t)); };
  const double top = std::log(opts_.alpha_max);
  const int n = opts_.grid_points;
  int best_i = 0;
  double best = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double v = f(top * i / n);
    if (v > best) {
      best = v;
      best_i = i;
    }
  }
  const double lo = top * std::max(0, best_i - 1) / n;
  const double hi = top * std::min(n, best_i + 1) / n;
  best = std::max(best, golden_max(f, lo, hi, 1e-12).second);
  best = std::max(best, golden_max(f, 0.0, top, 1e-12).second);
  return std::max(0.0, best);
}

double strong_converse_gamma(int d, double r, double rate, GammaOptions opts)
{
  return DepolarizingChannel(d, r, opts).gamma(rate);
}

void NoisyStorage::validate() const
{
  check_channel(d, r);
  require(std::isfinite(nu) && nu > 0.0, "storage rate nu must be positive");
}

} // namespace nsm
