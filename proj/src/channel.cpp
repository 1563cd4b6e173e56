#include "nsm/channel.hpp"

#include <random>

#include "nsm/error.hpp"

namespace nsm {

namespace {

bool coin(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

int survivors(Rng& rng, int n, double eta)
{
  if (n == 0 || eta == 0.0)
    return 0;
  return std::binomial_distribution<int>(n, eta)(rng);
}

// Bob's two detectors: `right` is the one matching Alice's bit. Returns (click, bit == alice).
std::pair<bool, bool> resolve(Rng& rng, bool right, bool wrong, double p_dark)
{
  right = right || coin(rng, p_dark);
  wrong = wrong || coin(rng, p_dark);
  if (right && wrong)
    return {true, coin(rng, 0.5)};
  return {right || wrong, right};
}

void finish(ChannelSample& s, const std::pair<bool, bool>& outcome)
{
  s.bob_click = outcome.first;
  if (s.bob_click) {
    s.bob_bit = outcome.second ? s.alice_bit : 1 - s.alice_bit;
    s.error_flag = s.bob_bit != s.alice_bit;
  }
}

// Photons that all reach the same detector; misalignment flips the whole signal.
ChannelSample single_mode(int n, const DetectorModel& det, Rng& rng, bool bases_match)
{
  ChannelSample s;
  s.n_emitted = n;
  s.alice_bit = coin(rng, 0.5);
  const int k = survivors(rng, n, det.eta);
  bool right = false, wrong = false;
  if (bases_match) {
    if (k > 0) {
      const bool flip = coin(rng, det.e_det);
      right = !flip;
      wrong = flip;
    }
  } else {
    const int to_right = k > 0 ? std::binomial_distribution<int>(k, 0.5)(rng) : 0;
    right = to_right > 0;
    wrong = k - to_right > 0;
  }
  finish(s, resolve(rng, right, wrong, det.p_dark));
  return s;
}

ChannelSample down_conversion(double mu, const DetectorModel& det, Rng& rng, bool bases_match)
{
  ChannelSample s;
  const double x = mu / 2.0;
  std::geometric_distribution<int> geo(1.0 / (1.0 + x));
  const int n = geo(rng) + geo(rng);
  const int m = std::uniform_int_distribution<int>(0, n)(rng);
  s.n_emitted = n;

  // Alice's detector for bit 0 sees n - m photons, her detector for bit 1 sees m.
  const bool a0 = survivors(rng, n - m, det.eta) > 0 || coin(rng, det.p_dark);
  const bool a1 = survivors(rng, m, det.eta) > 0 || coin(rng, det.p_dark);
  s.alice_valid = a0 != a1;
  if (!s.alice_valid)
    return s;
  s.alice_bit = a1 ? 1 : 0;

  // Bob's mode matching Alice's bit holds the photons correlated with her click.
  const int right_photons = s.alice_bit == 0 ? n - m : m;
  const int wrong_photons = n - right_photons;
  bool right = false, wrong = false;
  if (bases_match) {
    right = survivors(rng, right_photons, det.eta) > 0;
    wrong = survivors(rng, wrong_photons, det.eta) > 0;
    if (right != wrong && coin(rng, det.e_det))
      std::swap(right, wrong);
  } else {
    const int k = survivors(rng, n, det.eta);
    const int to_right = k > 0 ? std::binomial_distribution<int>(k, 0.5)(rng) : 0;
    right = to_right > 0;
    wrong = k - to_right > 0;
  }
  finish(s, resolve(rng, right, wrong, det.p_dark));
  return s;
}

} // namespace

ChannelSample sample_round(const SourceModel& src, const DetectorModel& det, Rng& rng, bool bases_match)
{
  switch (src.kind) {
  case SourceKind::wcp:
    return single_mode(src.mu > 0.0 ? std::poisson_distribution<int>(src.mu)(rng) : 0, det, rng, bases_match);
  case SourceKind::ideal_single_photon: return single_mode(1, det, rng, bases_match);
  case SourceKind::vacuum: return single_mode(0, det, rng, bases_match);
  case SourceKind::pdc: return down_conversion(src.mu, det, rng, bases_match);
  }
  throw DomainError("unknown source kind");
}

} // namespace nsm
