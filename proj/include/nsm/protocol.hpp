#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nsm/bits.hpp"
#include "nsm/channel.hpp"
#include "nsm/codes.hpp"
#include "nsm/sources.hpp"
#include "nsm/transport.hpp"

namespace nsm {

// Independent randomness for Alice, Bob and the physical channel.
struct SessionSeeds {
  std::uint64_t alice = 0;
  std::uint64_t bob = 0;
  std::uint64_t channel = 0;

  static SessionSeeds derive(std::uint64_t seed);
  Rng alice_rng(std::uint64_t phase) const;
  Rng bob_rng(std::uint64_t phase) const;
  Rng channel_rng(std::uint64_t phase) const;
};

// What Bob's detector reports for one kept round. `setting` and `n_emitted`
// are only meaningful to adversarial test strategies.
struct RoundView {
  bool click = false;
  int setting = 2;
  int n_emitted = 0;
};

class BobStrategy {
public:
  virtual ~BobStrategy() = default;
  // Rounds (indices into `rounds`) Bob reports as missing.
  virtual std::vector<std::uint32_t> missing_rounds(const std::vector<RoundView>& rounds) = 0;
};

class HonestBob final : public BobStrategy {
public:
  std::vector<std::uint32_t> missing_rounds(const std::vector<RoundView>& rounds) override;
};

class ScriptedBob final : public BobStrategy {
public:
  using Script = std::function<std::vector<std::uint32_t>(const std::vector<RoundView>&)>;
  explicit ScriptedBob(Script s) : script_(std::move(s)) {}
  std::vector<std::uint32_t> missing_rounds(const std::vector<RoundView>& rounds) override
  {
    return script_(rounds);
  }

private:
  Script script_;
};

struct WseeConfig {
  std::uint64_t M = 10000;     // rounds Alice keeps (all settings when decoys are used)
  double eps_interval = 1e-3;
};

struct WseeResult {
  bool aborted = false;
  std::string abort_reason;
  Bits alice_x;                       // Alice's output string
  std::vector<std::uint32_t> bob_I;   // positions of alice_x Bob measured in the right basis
  Bits bob_z;                         // Bob's bits at bob_I
  std::uint64_t rounds = 0;
  std::uint64_t missing = 0;
};

WseeResult run_wsee(const WseeConfig& cfg, const SourceModel& src, const DetectorModel& det,
                    Transport& link, const SessionSeeds& seeds, BobStrategy* bob = nullptr);

// Settings are indexed 0 = vacuum, 1 = decoy, 2 = signal.
struct DecoyWseeResult {
  WseeResult wsee;
  std::array<std::uint64_t, 3> sent{};
  std::array<std::uint64_t, 3> missing{};

  // Measured click fraction of one setting.
  double gain(int setting) const;
};

DecoyWseeResult run_wsee_decoy(const WseeConfig& cfg, double mu, double mu_hat, const DetectorModel& det,
                               Transport& link, const SessionSeeds& seeds, BobStrategy* bob = nullptr,
                               int n_max = 40);

struct FrotParams {
  int beta = 32;
  double omega = 2;
  int ell = 16;
  std::optional<int> t;   // defaults to the largest value the subset encoding allows
};

struct FrotResult {
  bool aborted = false;
  std::string abort_reason;
  Bits s0, s1;   // Alice
  int c = 0;     // Bob
  Bits y;        // Bob
  bool decode_ok = true;

  int alpha = 0;
  int t = 0;
  std::uint64_t m_used = 0;
  Bits w, w0, w1;
  std::vector<std::uint32_t> permutation;   // permutation[dest] = source position
  std::vector<std::uint32_t> known;         // Bob's truncated index set
};

FrotResult run_frot(const WseeResult& wsee, const FrotParams& params, const LinearCode& row_code,
                    Transport& link, const SessionSeeds& seeds);

// True iff every position placed in a row of `rows` comes from `known` and no other does.
bool permutation_respects_subset(const std::vector<std::uint32_t>& permutation,
                                 const std::vector<std::uint32_t>& known, const std::vector<int>& rows,
                                 int beta);

// 1-2 oblivious transfer of ell-bit messages from a fully random one.
Bits run_ot(const FrotResult& frot, const Bits& m0, const Bits& m1, int choice, Transport& link);

} // namespace nsm
