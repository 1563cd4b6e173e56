#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "nsm/error.hpp"
#include "nsm/protocol.hpp"
#include "nsm/stats.hpp"

using namespace nsm;

namespace {

const DetectorModel perfect{1.0, 0.0, 0.0};
const DetectorModel reference_detector{0.7, 0.85e-6, 0.033};

std::uint64_t mismatches(const WseeResult& r)
{
  return (select(r.alice_x, r.bob_I) ^ r.bob_z).count();
}

} // namespace

TEST_CASE("frames round-trip and reject garbage")
{
  const Message msg{MessageKind::syndromes, {1, 2, 3, 250}};
  const auto bytes = encode_frame(msg);
  CHECK(bytes.size() == 4 + 1 + 4);
  std::size_t off = 0;
  const auto back = decode_frame(bytes, off);
  CHECK(off == bytes.size());
  CHECK(back.kind == msg.kind);
  CHECK(back.payload == msg.payload);

  auto cut = bytes;
  cut.pop_back();
  off = 0;
  CHECK_THROWS_AS(decode_frame(cut, off), ProtocolError);
  auto bad = bytes;
  bad[4] = 200;
  off = 0;
  CHECK_THROWS_AS(decode_frame(bad, off), ProtocolError);
}

TEST_CASE("transport is FIFO per direction and records a replayable transcript")
{
  Transport link;
  link.send(Direction::alice_to_bob, {MessageKind::basis_info, {1}});
  link.send(Direction::bob_to_alice, {MessageKind::missing_report, {2, 3}});
  link.send(Direction::alice_to_bob, {MessageKind::basis_info, {4}});
  link.wait();
  CHECK(link.receive(Direction::alice_to_bob).payload == std::vector<std::uint8_t>{1});
  CHECK(link.expect(Direction::bob_to_alice, MessageKind::missing_report).payload ==
        std::vector<std::uint8_t>{2, 3});
  CHECK_THROWS_AS(link.expect(Direction::alice_to_bob, MessageKind::permutation), ProtocolError);
  CHECK_THROWS_AS(link.receive(Direction::alice_to_bob), ProtocolError);

  const auto text = link.dump();
  const auto parsed = Transport::parse(text);
  CHECK(parsed == link.transcript());
  CHECK(parsed.size() == 4);
  CHECK(parsed[3].kind == MessageKind::wait);
  CHECK(parsed[3].dir == Direction::none);
  CHECK(text.find("1, B->A, missing_report, 0203") != std::string::npos);
}

TEST_CASE("payload reader")
{
  Writer w;
  w.u32(7);
  w.bits(from_string01("1011001"));
  w.u32s({1, 2, 99});
  const auto bytes = w.take();
  Reader r(bytes);
  CHECK(r.u32() == 7);
  CHECK(to_string01(r.bits()) == "1011001");
  CHECK(r.u32s() == std::vector<std::uint32_t>{1, 2, 99});
  CHECK(r.done());
  Reader short_reader(bytes);
  short_reader.u32();
  short_reader.bits();
  CHECK_THROWS_AS(short_reader.finish(), ProtocolError);
  std::vector<std::uint8_t> tiny{1, 0};
  Reader t(tiny);
  CHECK_THROWS_AS(t.u32(), ProtocolError);
}

TEST_CASE("perfect single photons always click and never err")
{
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const auto s = sample_round(SourceModel::ideal(), perfect, rng);
    CHECK(s.bob_click);
    CHECK(!s.error_flag);
    CHECK(s.bob_bit == s.alice_bit);
    CHECK(s.n_emitted == 1);
  }
}

TEST_CASE("noiseless weak string erasure")
{
  Transport link;
  const auto r = run_wsee(WseeConfig{10000, 0.01}, SourceModel::ideal(), perfect, link, SessionSeeds::derive(1));
  REQUIRE(!r.aborted);
  const auto m = r.alice_x.size();
  CHECK(m == 10000);
  CHECK(r.missing == 0);
  CHECK(std::abs(double(r.bob_I.size()) - m / 2.0) <= 4 * std::sqrt(m / 4.0));
  CHECK(r.bob_z == select(r.alice_x, r.bob_I));
  CHECK(std::is_sorted(r.bob_I.begin(), r.bob_I.end()));
}

TEST_CASE("lossy weak string erasure tracks the model")
{
  const auto src = SourceModel::wcp(0.3);
  const auto ch = characterize(src, reference_detector);
  std::uint64_t kept = 0, known = 0, errors = 0, aborts = 0;
  for (int run = 0; run < 20; ++run) {
    Transport link;
    const auto r = run_wsee(WseeConfig{10000, 0.01}, src, reference_detector, link, SessionSeeds::derive(100 + run));
    if (r.aborted) {
      ++aborts;
      continue;
    }
    kept += r.alice_x.size();
    known += r.bob_I.size();
    errors += mismatches(r);
  }
  CHECK(aborts == 0);
  const double n = 20 * 10000.0;
  const double p = ch.p_h_B_click;
  CHECK(std::abs(kept - p * n) <= 4 * std::sqrt(p * (1 - p) * n));
  const double e = ch.p_err_conditioned;
  CHECK(std::abs(errors - e * known) <= 4 * std::sqrt(e * (1 - e) * known));
}

TEST_CASE("a Bob who over-reports is caught")
{
  const auto src = SourceModel::wcp(0.3);
  const auto ch = characterize(src, reference_detector);
  const std::uint64_t M = 10000;
  const double zeta = chernoff_halfwidth(double(M), 0.01);
  const auto target = static_cast<std::uint32_t>(std::ceil((ch.p_h_B_no_click + 2 * zeta) * M));
  ScriptedBob greedy([&](const std::vector<RoundView>& rounds) {
    std::vector<std::uint32_t> out;
    for (std::uint32_t i = 0; i < rounds.size() && out.size() < target; ++i)
      out.push_back(i);
    return out;
  });
  Transport link;
  const auto r = run_wsee(WseeConfig{M, 0.01}, src, reference_detector, link, SessionSeeds::derive(5), &greedy);
  CHECK(r.aborted);
  CHECK(r.abort_reason.find("interval") != std::string::npos);
  CHECK(r.alice_x.size() == 0);
  CHECK(link.transcript().back().kind == MessageKind::abort);
}

TEST_CASE("identical seeds replay identically")
{
  auto once = [](std::uint64_t seed) {
    Transport link;
    const auto w = run_wsee(WseeConfig{2000, 0.01}, SourceModel::ideal(), perfect, link, SessionSeeds::derive(seed));
    FrotParams fp;
    fp.beta = 16;
    fp.ell = 8;
    const auto f = run_frot(w, fp, LinearCode::for_error_rate(16, 0.0), link, SessionSeeds::derive(seed));
    return std::make_pair(link.dump(), to_string01(f.y));
  };
  const auto a = once(42), b = once(42), c = once(43);
  CHECK(a == b);
  CHECK(a.first != c.first);
}

TEST_CASE("decoy weak string erasure")
{
  const double mu = 0.3, mu_hat = 0.05;
  const std::uint64_t M = 60000;
  const double eps = 1e-3;
  Transport link;
  const auto r = run_wsee_decoy(WseeConfig{M, eps}, mu, mu_hat, reference_detector, link, SessionSeeds::derive(9));
  REQUIRE(!r.wsee.aborted);
  const SourceCharacterization chars[3] = {characterize(SourceModel::vacuum(), reference_detector),
                                           characterize(SourceModel::wcp(mu_hat), reference_detector),
                                           characterize(SourceModel::wcp(mu), reference_detector)};
  std::uint64_t total = 0;
  for (int s = 0; s < 3; ++s) {
    total += r.sent[s];
    const double gain = 1.0 - double(r.missing[s]) / r.sent[s];
    CHECK(std::abs(gain - chars[s].p_h_B_click) <= chernoff_halfwidth(double(r.sent[s]), eps));
    CHECK(r.gain(s) == doctest::Approx(gain));
  }
  CHECK(total == M);
  // Only signal rounds survive.
  CHECK(r.wsee.alice_x.size() == r.sent[2] - r.missing[2]);
}

TEST_CASE("a Bob who hides the decoy setting is caught")
{
  ScriptedBob suppress([](const std::vector<RoundView>& rounds) {
    std::vector<std::uint32_t> out;
    for (std::uint32_t i = 0; i < rounds.size(); ++i)
      if (!rounds[i].click || rounds[i].setting == 1)
        out.push_back(i);
    return out;
  });
  Transport link;
  const auto r = run_wsee_decoy(WseeConfig{30000, 1e-3}, 0.3, 0.05, reference_detector, link, SessionSeeds::derive(3),
                                &suppress);
  CHECK(r.wsee.aborted);
  CHECK(r.wsee.abort_reason.find("decoy") != std::string::npos);
}

TEST_CASE("nearly empty pulses leave an empty string without aborting")
{
  Transport link;
  const auto r = run_wsee_decoy(WseeConfig{3000, 1e-3}, 2e-9, 1e-9, DetectorModel{0.5, 0.0, 0.0}, link,
                                SessionSeeds::derive(4));
  CHECK(!r.wsee.aborted);
  CHECK(r.wsee.alice_x.size() == 0);
  CHECK(r.wsee.bob_I.empty());
  FrotParams fp;
  fp.beta = 16;
  fp.ell = 4;
  const auto f = run_frot(r.wsee, fp, LinearCode::trivial(16), link, SessionSeeds::derive(4));
  CHECK(f.aborted);
}

TEST_CASE("noiseless randomized oblivious transfer")
{
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Transport link;
    const auto w = run_wsee(WseeConfig{600, 0.01}, SourceModel::ideal(), perfect, link, SessionSeeds::derive(seed));
    REQUIRE(!w.aborted);
    FrotParams fp;
    fp.beta = 16;
    fp.ell = 12;
    fp.t = 8;
    const auto f = run_frot(w, fp, LinearCode::for_error_rate(16, 0.0), link, SessionSeeds::derive(seed));
    REQUIRE(!f.aborted);
    CHECK(f.alpha == 36);
    CHECK(f.m_used == 576);
    CHECK(f.t == 8);
    CHECK(f.y == (f.c == 0 ? f.s0 : f.s1));
    CHECK(f.w == (f.c == 0 ? f.w0 : f.w1));
    CHECK(f.s0.size() == 12);
    CHECK(permutation_respects_subset(f.permutation, f.known, SubsetEncoding(f.alpha, f.t).encode(f.w), fp.beta));
  }
}

TEST_CASE("truncation to a multiple of four blocks")
{
  Transport link;
  const auto w = run_wsee(WseeConfig{300, 0.01}, SourceModel::ideal(), perfect, link, SessionSeeds::derive(8));
  FrotParams fp;
  fp.beta = 16;
  fp.ell = 4;
  const auto f = run_frot(w, fp, LinearCode::trivial(16), link, SessionSeeds::derive(8));
  REQUIRE(!f.aborted);
  CHECK(f.alpha == 16);
  CHECK(f.m_used == 256);
  CHECK(f.t == 10);
  CHECK(f.y == (f.c == 0 ? f.s0 : f.s1));
  bool recorded = false;
  for (const auto& rec : link.transcript())
    recorded |= rec.kind == MessageKind::truncation;
  CHECK(recorded);
}

TEST_CASE("bob aborts with too few known positions")
{
  Transport link;
  auto w = run_wsee(WseeConfig{512, 0.01}, SourceModel::ideal(), perfect, link, SessionSeeds::derive(2));
  w.bob_I.resize(100);
  w.bob_z.resize(100);
  FrotParams fp;
  fp.beta = 16;
  fp.ell = 4;
  const auto f = run_frot(w, fp, LinearCode::trivial(16), link, SessionSeeds::derive(2));
  CHECK(f.aborted);
  CHECK(f.abort_reason.find("m/4") != std::string::npos);
}

TEST_CASE("noisy randomized oblivious transfer with a correcting code")
{
  const DetectorModel noisy{1.0, 0.0, 0.02};
  Rng code_rng(77);
  const auto code = LinearCode::lookup(32, 4, code_rng);
  int recovered = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Transport link;
    const auto w = run_wsee(WseeConfig{1024, 0.01}, SourceModel::ideal(), noisy, link, SessionSeeds::derive(seed));
    FrotParams fp;
    fp.beta = 32;
    fp.ell = 16;
    const auto f = run_frot(w, fp, code, link, SessionSeeds::derive(seed));
    REQUIRE(!f.aborted);
    recovered += f.y == (f.c == 0 ? f.s0 : f.s1);
  }
  CHECK(recovered >= 18);
}

TEST_CASE("oblivious transfer from the randomized version")
{
  Rng msg_rng(5);
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    Transport link;
    const auto w = run_wsee(WseeConfig{600, 0.01}, SourceModel::ideal(), perfect, link, SessionSeeds::derive(seed));
    FrotParams fp;
    fp.beta = 16;
    fp.ell = 10;
    const auto f = run_frot(w, fp, LinearCode::trivial(16), link, SessionSeeds::derive(seed));
    const Bits m0 = random_bits(10, msg_rng), m1 = random_bits(10, msg_rng);
    for (int choice : {0, 1}) {
      Transport ot_link;
      const Bits got = run_ot(f, m0, m1, choice, ot_link);
      CHECK(got == (choice == 0 ? m0 : m1));
      const auto delta = ot_link.transcript().front().payload.at(0);
      CHECK(delta == (choice ^ f.c));
    }
  }
  Transport link;
  FrotResult empty;
  empty.aborted = true;
  CHECK_THROWS_AS(run_ot(empty, Bits(4), Bits(4), 0, link), DomainError);
}

TEST_CASE("the unchosen string looks unbiased")
{
  const Bits mask = from_string01("10110010");
  int ones = 0, runs = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Transport link;
    const auto w = run_wsee(WseeConfig{300, 0.01}, SourceModel::ideal(), perfect, link, SessionSeeds::derive(seed));
    FrotParams fp;
    fp.beta = 16;
    fp.ell = 8;
    const auto f = run_frot(w, fp, LinearCode::trivial(16), link, SessionSeeds::derive(seed));
    REQUIRE(!f.aborted);
    const Bits& other = f.c == 0 ? f.s1 : f.s0;
    ones += ((other & mask).count() & 1u);
    ++runs;
  }
  CHECK(std::abs(ones - runs / 2.0) <= 4 * std::sqrt(runs / 4.0));
}

TEST_CASE("malformed messages are rejected")
{
  // A permutation with a repeated entry.
  Transport link;
  const auto w = run_wsee(WseeConfig{300, 0.01}, SourceModel::ideal(), perfect, link, SessionSeeds::derive(8));
  CHECK(permutation_respects_subset({0, 1, 2, 3}, {0, 1}, {0}, 2));
  CHECK(!permutation_respects_subset({2, 1, 0, 3}, {0, 1}, {0}, 2));
  FrotParams fp;
  fp.beta = 16;
  fp.ell = 400;
  CHECK_THROWS_AS(run_frot(w, fp, LinearCode::trivial(16), link, SessionSeeds::derive(8)), DomainError);
  fp.ell = 4;
  CHECK_THROWS_AS(run_frot(w, fp, LinearCode::trivial(8), link, SessionSeeds::derive(8)), DomainError);
}
