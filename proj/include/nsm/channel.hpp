#pragma once

#include "nsm/bits.hpp"
#include "nsm/sources.hpp"

namespace nsm {

struct ChannelSample {
  int n_emitted = 0;       // photons leaving Alice's lab toward Bob
  bool alice_valid = true; // PDC: exactly one of Alice's detectors clicked
  int alice_bit = 0;
  bool bob_click = false;
  int bob_bit = 0;
  bool error_flag = false; // Bob clicked and bob_bit != alice_bit
};

// Draws one round from the physical model. With bases_match false Bob's
// result is independent of Alice's bit.
ChannelSample sample_round(const SourceModel& src, const DetectorModel& det, Rng& rng,
                           bool bases_match = true);

} // namespace nsm
