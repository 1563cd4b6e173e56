#include "nsm/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "nsm/error.hpp"
#include "nsm/stats.hpp"

namespace nsm {

namespace {

constexpr auto to_bob = Direction::alice_to_bob;
constexpr auto to_alice = Direction::bob_to_alice;

std::uint32_t lo(std::uint64_t v) { return static_cast<std::uint32_t>(v); }
std::uint32_t hi(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

Rng stream(std::uint64_t base, std::uint64_t phase)
{
  std::seed_seq seq{lo(base), hi(base), lo(phase), hi(phase)};
  return Rng(seq);
}

void send_abort(Transport& link, Direction dir, const std::string& reason)
{
  link.send(dir, {MessageKind::abort, {reason.begin(), reason.end()}});
}

// Consumes a message that must be an abort and returns its reason.
std::string receive_abort(Transport& link, Direction dir)
{
  const auto msg = link.receive(dir);
  if (msg.kind != MessageKind::abort)
    throw ProtocolError("expected abort, got " + to_string(msg.kind));
  return {msg.payload.begin(), msg.payload.end()};
}

// Bob announces the rounds he claims he did not detect; Alice parses and
// validates the list.
std::vector<std::uint32_t> report_missing(BobStrategy& bob, const std::vector<RoundView>& views, Transport& link)
{
  auto missing = bob.missing_rounds(views);
  std::sort(missing.begin(), missing.end());
  missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
  Writer w;
  w.u32s(missing);
  link.send(to_alice, {MessageKind::missing_report, w.take()});

  const auto msg = link.expect(to_alice, MessageKind::missing_report);
  Reader r(msg.payload);
  auto got = r.u32s();
  r.finish();
  for (std::size_t i = 0; i < got.size(); ++i) {
    if (got[i] >= views.size() || (i > 0 && got[i] <= got[i - 1]))
      throw ProtocolError("missing report is not a sorted list of round indices");
  }
  return got;
}

std::vector<std::uint32_t> complement(const std::vector<std::uint32_t>& sorted, std::size_t n)
{
  std::vector<std::uint32_t> out;
  out.reserve(n - sorted.size());
  std::size_t j = 0;
  for (std::uint32_t i = 0; i < n; ++i) {
    if (j < sorted.size() && sorted[j] == i)
      ++j;
    else
      out.push_back(i);
  }
  return out;
}

struct PartyRounds {
  std::vector<std::uint8_t> basis;
  Bits bits;
};

PartyRounds restrict(const PartyRounds& all, const std::vector<std::uint32_t>& kept)
{
  PartyRounds out{{}, select(all.bits, kept)};
  out.basis.reserve(kept.size());
  for (auto i : kept)
    out.basis.push_back(all.basis[i]);
  return out;
}

// Alice announces her bases for the kept rounds; Bob keeps the matches.
WseeResult reveal_bases(Transport& link, const PartyRounds& alice, const PartyRounds& bob)
{
  Bits bases(alice.basis.size());
  for (std::size_t i = 0; i < bases.size(); ++i)
    bases[i] = alice.basis[i];
  Writer w;
  w.bits(bases);
  link.send(to_bob, {MessageKind::basis_info, w.take()});

  WseeResult res;
  res.alice_x = alice.bits;

  const auto msg = link.expect(to_bob, MessageKind::basis_info);
  Reader r(msg.payload);
  const Bits announced = r.bits();
  r.finish();
  if (announced.size() != bob.basis.size())
    throw ProtocolError("basis string length does not match the kept rounds");
  std::vector<bool> z;
  for (std::uint32_t j = 0; j < announced.size(); ++j) {
    if (announced[j] == bool(bob.basis[j])) {
      res.bob_I.push_back(j);
      z.push_back(bob.bits[j]);
    }
  }
  res.bob_z.resize(z.size());
  for (std::size_t i = 0; i < z.size(); ++i)
    res.bob_z[i] = z[i];
  return res;
}

void record(PartyRounds& p, int basis, bool bit)
{
  p.basis.push_back(static_cast<std::uint8_t>(basis));
  p.bits.push_back(bit);
}

} // namespace

SessionSeeds SessionSeeds::derive(std::uint64_t seed)
{
  std::seed_seq seq{lo(seed), hi(seed), 0x6e736d31u};
  std::array<std::uint32_t, 6> w{};
  seq.generate(w.begin(), w.end());
  auto join = [&](int i) { return std::uint64_t(w[2 * i]) | std::uint64_t(w[2 * i + 1]) << 32; };
  return {join(0), join(1), join(2)};
}

Rng SessionSeeds::alice_rng(std::uint64_t phase) const { return stream(alice, phase); }
Rng SessionSeeds::bob_rng(std::uint64_t phase) const { return stream(bob, phase); }
Rng SessionSeeds::channel_rng(std::uint64_t phase) const { return stream(channel, phase); }

std::vector<std::uint32_t> HonestBob::missing_rounds(const std::vector<RoundView>& rounds)
{
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < rounds.size(); ++i)
    if (!rounds[i].click)
      out.push_back(i);
  return out;
}

WseeResult run_wsee(const WseeConfig& cfg, const SourceModel& src, const DetectorModel& det, Transport& link,
                    const SessionSeeds& seeds, BobStrategy* bob)
{
  src.validate();
  det.validate();
  require(cfg.M >= 1 && cfg.M <= std::numeric_limits<std::uint32_t>::max(), "M must be in [1, 2^32)");
  const auto ch = characterize(src, det);
  const double zeta = chernoff_halfwidth(double(cfg.M), cfg.eps_interval);
  HonestBob honest;
  if (!bob)
    bob = &honest;

  auto arng = seeds.alice_rng(1);
  auto brng = seeds.bob_rng(1);
  auto crng = seeds.channel_rng(1);
  PartyRounds alice, bobs;
  std::vector<RoundView> views;
  views.reserve(cfg.M);
  while (views.size() < cfg.M) {
    const int ta = int(arng() & 1), tb = int(brng() & 1);
    const auto s = sample_round(src, det, crng, ta == tb);
    if (!s.alice_valid)
      continue;
    record(alice, ta, s.alice_bit);
    record(bobs, tb, s.bob_click ? bool(s.bob_bit) : bool(brng() & 1));
    views.push_back({s.bob_click, 2, s.n_emitted});
  }

  const auto missing = report_missing(*bob, views, link);
  if (!interval_contains(missing.size(), ch.p_h_B_no_click, zeta, cfg.M)) {
    send_abort(link, to_bob, "missing-report count outside interval");
    WseeResult res;
    res.aborted = true;
    res.abort_reason = receive_abort(link, to_bob);
    res.rounds = cfg.M;
    res.missing = missing.size();
    return res;
  }
  link.wait();
  const auto kept = complement(missing, cfg.M);
  auto res = reveal_bases(link, restrict(alice, kept), restrict(bobs, kept));
  res.rounds = cfg.M;
  res.missing = missing.size();
  return res;
}

double DecoyWseeResult::gain(int setting) const
{
  require(setting >= 0 && setting < 3, "setting must be 0, 1 or 2");
  if (sent[setting] == 0)
    return std::numeric_limits<double>::quiet_NaN();
  return 1.0 - double(missing[setting]) / double(sent[setting]);
}

DecoyWseeResult run_wsee_decoy(const WseeConfig& cfg, double mu, double mu_hat, const DetectorModel& det,
                               Transport& link, const SessionSeeds& seeds, BobStrategy* bob, int n_max)
{
  det.validate();
  require(mu_hat >= 0 && mu_hat < mu, "decoy intensity must satisfy 0 <= mu_hat < mu");
  require(cfg.M >= 1 && cfg.M <= std::numeric_limits<std::uint32_t>::max(), "M must be in [1, 2^32)");
  const std::array<SourceModel, 3> sources = {SourceModel::vacuum(n_max), SourceModel::wcp(mu_hat, n_max),
                                              SourceModel::wcp(mu, n_max)};
  std::array<double, 3> p_no_click{};
  for (int s = 0; s < 3; ++s)
    p_no_click[s] = characterize(sources[s], det).p_h_B_no_click;
  static constexpr std::array<const char*, 3> names = {"vacuum", "decoy", "signal"};
  HonestBob honest;
  if (!bob)
    bob = &honest;

  auto arng = seeds.alice_rng(1);
  auto brng = seeds.bob_rng(1);
  auto crng = seeds.channel_rng(1);
  std::uniform_int_distribution<int> pick(0, 2);
  PartyRounds alice, bobs;
  std::vector<int> setting;
  std::vector<RoundView> views;
  views.reserve(cfg.M);
  DecoyWseeResult out;
  while (views.size() < cfg.M) {
    const int s = pick(arng);
    const int ta = int(arng() & 1), tb = int(brng() & 1);
    const auto smp = sample_round(sources[s], det, crng, ta == tb);
    record(alice, ta, smp.alice_bit);
    record(bobs, tb, smp.bob_click ? bool(smp.bob_bit) : bool(brng() & 1));
    setting.push_back(s);
    views.push_back({smp.bob_click, s, smp.n_emitted});
    ++out.sent[s];
  }

  const auto missing = report_missing(*bob, views, link);
  for (auto i : missing)
    ++out.missing[setting[i]];
  out.wsee.rounds = cfg.M;
  out.wsee.missing = missing.size();
  for (int s = 0; s < 3; ++s) {
    if (out.sent[s] == 0)
      continue;
    const double zeta = chernoff_halfwidth(double(out.sent[s]), cfg.eps_interval);
    if (!interval_contains(out.missing[s], p_no_click[s], zeta, out.sent[s])) {
      send_abort(link, to_bob, std::string("missing-report count outside interval for the ") + names[s] +
                                   " setting");
      out.wsee.aborted = true;
      out.wsee.abort_reason = receive_abort(link, to_bob);
      return out;
    }
  }
  link.wait();

  // Alice keeps the detected signal rounds and tells Bob which they are.
  std::vector<std::uint32_t> surviving;
  for (auto i : complement(missing, cfg.M))
    if (setting[i] == 2)
      surviving.push_back(i);
  Writer w;
  w.u32s(surviving);
  link.send(to_bob, {MessageKind::surviving_rounds, w.take()});
  const auto msg = link.expect(to_bob, MessageKind::surviving_rounds);
  Reader r(msg.payload);
  const auto bob_kept = r.u32s();
  r.finish();
  for (auto i : bob_kept)
    if (i >= cfg.M)
      throw ProtocolError("surviving round index out of range");

  const auto rounds = out.wsee.rounds;
  const auto miss = out.wsee.missing;
  out.wsee = reveal_bases(link, restrict(alice, surviving), restrict(bobs, bob_kept));
  out.wsee.rounds = rounds;
  out.wsee.missing = miss;
  return out;
}

bool permutation_respects_subset(const std::vector<std::uint32_t>& permutation,
                                 const std::vector<std::uint32_t>& known, const std::vector<int>& rows, int beta)
{
  require(beta >= 1, "beta must be positive");
  auto k = known;
  std::sort(k.begin(), k.end());
  for (std::size_t dest = 0; dest < permutation.size(); ++dest) {
    const bool in_rows = std::binary_search(rows.begin(), rows.end(), int(dest / beta));
    const bool is_known = std::binary_search(k.begin(), k.end(), permutation[dest]);
    if (in_rows != is_known)
      return false;
  }
  return true;
}

FrotResult run_frot(const WseeResult& wsee, const FrotParams& params, const LinearCode& row_code,
                    Transport& link, const SessionSeeds& seeds)
{
  require(params.beta >= 1, "beta must be positive");
  require(params.ell >= 1, "ell must be positive");
  require(params.omega >= 2, "omega must be at least 2");
  require(row_code.n() == params.beta, "row code length must equal beta");

  FrotResult res;
  if (wsee.aborted) {
    res.aborted = true;
    res.abort_reason = "weak string erasure aborted";
    return res;
  }

  // Alice truncates to alpha = 4 floor(m / 4 beta) rows of beta bits.
  const std::uint64_t m_full = wsee.alice_x.size();
  const auto beta = static_cast<std::uint64_t>(params.beta);
  const auto alpha = static_cast<int>(4 * (m_full / (4 * beta)));
  if (alpha < 4) {
    send_abort(link, to_bob, "string shorter than 4 beta");
    res.aborted = true;
    res.abort_reason = receive_abort(link, to_bob);
    return res;
  }
  const std::uint64_t m = alpha * beta;
  const std::uint64_t k = m / 4;
  require(std::uint64_t(params.ell) <= k, "ell must not exceed m/4");
  const auto enc = params.t ? SubsetEncoding(alpha, *params.t) : SubsetEncoding::for_universe(alpha);
  const int t = enc.t();
  res.alpha = alpha;
  res.t = t;
  res.m_used = m;
  {
    Writer w;
    w.u32(static_cast<std::uint32_t>(m_full));
    w.u32(static_cast<std::uint32_t>(m));
    w.u32(static_cast<std::uint32_t>(alpha));
    w.u32(static_cast<std::uint32_t>(beta));
    w.u32(static_cast<std::uint32_t>(t));
    link.send(to_bob, {MessageKind::truncation, w.take()});
  }
  auto arng = seeds.alice_rng(2);
  auto brng = seeds.bob_rng(2);

  // Bob: check the truncation, pick m/4 known positions and a subset of rows.
  {
    const auto msg = link.expect(to_bob, MessageKind::truncation);
    Reader r(msg.payload);
    r.u32();
    const auto bm = r.u32(), ba = r.u32(), bb = r.u32(), bt = r.u32();
    r.finish();
    if (bm != m || ba != std::uint32_t(alpha) || bb != beta || bt != std::uint32_t(t))
      throw ProtocolError("inconsistent truncation message");
  }
  std::vector<std::uint32_t> known_all;
  std::vector<int> z_at(m, -1);
  for (std::size_t i = 0; i < wsee.bob_I.size(); ++i) {
    if (wsee.bob_I[i] < m) {
      known_all.push_back(wsee.bob_I[i]);
      z_at[wsee.bob_I[i]] = wsee.bob_z[i];
    }
  }
  if (known_all.size() < k) {
    send_abort(link, to_alice, "Bob holds fewer than m/4 known positions");
    res.aborted = true;
    res.abort_reason = receive_abort(link, to_alice);
    return res;
  }
  std::sample(known_all.begin(), known_all.end(), std::back_inserter(res.known), k, brng);
  res.w = random_bits(t, brng);
  const auto bob_rows = enc.encode(res.w);
  {
    std::vector<std::uint32_t> kpos = res.known, upos;
    std::vector<bool> is_known(m, false);
    for (auto p : kpos)
      is_known[p] = true;
    for (std::uint32_t p = 0; p < m; ++p)
      if (!is_known[p])
        upos.push_back(p);
    std::shuffle(kpos.begin(), kpos.end(), brng);
    std::shuffle(upos.begin(), upos.end(), brng);
    std::vector<std::uint32_t> perm(m);
    std::size_t kc = 0, uc = 0;
    for (int j = 0; j < alpha; ++j) {
      const bool in_rows = std::binary_search(bob_rows.begin(), bob_rows.end(), j);
      for (std::uint64_t b = 0; b < beta; ++b)
        perm[j * beta + b] = in_rows ? kpos[kc++] : upos[uc++];
    }
    Writer w;
    w.u32s(perm);
    link.send(to_alice, {MessageKind::permutation, w.take()});
  }

  // Alice: the permutation must be a bijection on [m].
  {
    const auto msg = link.expect(to_alice, MessageKind::permutation);
    Reader r(msg.payload);
    res.permutation = r.u32s();
    r.finish();
    std::vector<bool> seen(m, false);
    bool ok = res.permutation.size() == m;
    for (std::size_t i = 0; ok && i < res.permutation.size(); ++i) {
      const auto p = res.permutation[i];
      ok = p < m && !seen[p];
      if (ok)
        seen[p] = true;
    }
    if (!ok)
      throw ProtocolError("permutation message is not a permutation of [m]");
  }

  // Interactive hashing of Bob's row-subset label.
  HashingAlice ha(t, arng);
  HashingBob hb(res.w);
  std::vector<Bits> bob_queries;
  std::vector<bool> bob_answers;
  while (!ha.done()) {
    {
      Writer w;
      w.bits(ha.next_query());
      link.send(to_bob, {MessageKind::hash_query, w.take()});
    }
    {
      const auto msg = link.expect(to_bob, MessageKind::hash_query);
      Reader r(msg.payload);
      auto q = r.bits();
      r.finish();
      if (q.size() != std::size_t(t))
        throw ProtocolError("hash query has the wrong length");
      const bool a = hb.answer(q);
      bob_queries.push_back(std::move(q));
      bob_answers.push_back(a);
      link.send(to_alice, {MessageKind::hash_answer, {std::uint8_t(a)}});
    }
    const auto msg = link.expect(to_alice, MessageKind::hash_answer);
    if (msg.payload.size() != 1 || msg.payload[0] > 1)
      throw ProtocolError("hash answer must be a single bit");
    ha.receive_answer(msg.payload[0] == 1);
  }
  std::tie(res.w0, res.w1) = ha.outputs();

  // Alice: syndromes of every row either candidate subset uses, then two hash seeds.
  const auto rows0 = enc.encode(res.w0), rows1 = enc.encode(res.w1);
  auto alice_row = [&](int j) {
    Bits row(beta);
    for (std::uint64_t b = 0; b < beta; ++b)
      row[b] = wsee.alice_x[res.permutation[j * beta + b]];
    return row;
  };
  {
    std::vector<int> rows;
    std::set_union(rows0.begin(), rows0.end(), rows1.begin(), rows1.end(), std::back_inserter(rows));
    Writer w;
    w.u32(static_cast<std::uint32_t>(rows.size()));
    for (int j : rows) {
      w.u32(static_cast<std::uint32_t>(j));
      w.bits(row_code.syndrome(alice_row(j)));
    }
    link.send(to_bob, {MessageKind::syndromes, w.take()});
  }
  auto concat_rows = [&](const std::vector<int>& rows, auto&& row_of) {
    Bits out;
    out.reserve(k);
    for (int j : rows) {
      const Bits row = row_of(j);
      for (std::size_t b = 0; b < row.size(); ++b)
        out.push_back(row[b]);
    }
    return out;
  };
  const auto seed0 = HashSeed::random(int(k), params.ell, arng);
  const auto seed1 = HashSeed::random(int(k), params.ell, arng);
  res.s0 = extract(concat_rows(rows0, alice_row), seed0);
  res.s1 = extract(concat_rows(rows1, alice_row), seed1);
  {
    Writer w;
    w.bits(seed0.bits);
    w.bits(seed1.bits);
    link.send(to_bob, {MessageKind::hash_seeds, w.take()});
  }

  // Bob: identify c, correct his rows and hash.
  const auto [v0, v1] = solve_parities(t, bob_queries, bob_answers);
  if (res.w != v0 && res.w != v1)
    throw ProtocolError("interactive hashing is inconsistent with Bob's input");
  res.c = res.w == v0 ? 0 : 1;
  std::map<int, Bits> syndromes;
  {
    const auto msg = link.expect(to_bob, MessageKind::syndromes);
    Reader r(msg.payload);
    const auto count = r.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
      const int j = static_cast<int>(r.u32());
      auto syn = r.bits();
      if (j >= alpha || syn.size() != std::size_t(row_code.syndrome_length()))
        throw ProtocolError("malformed syndrome entry");
      syndromes[j] = std::move(syn);
    }
    r.finish();
  }
  std::array<HashSeed, 2> bob_seeds;
  {
    const auto msg = link.expect(to_bob, MessageKind::hash_seeds);
    Reader r(msg.payload);
    for (auto& s : bob_seeds) {
      s.bits = r.bits();
      s.k = int(k);
      s.ell = params.ell;
      if (s.bits.size() != k + params.ell - 1)
        throw ProtocolError("hash seed has the wrong length");
    }
    r.finish();
  }
  auto bob_row = [&](int j) {
    const auto it = syndromes.find(j);
    if (it == syndromes.end())
      throw ProtocolError("no syndrome for one of Bob's rows");
    Bits row(beta);
    for (std::uint64_t b = 0; b < beta; ++b)
      row[b] = z_at[res.permutation[j * beta + b]] == 1;
    const auto d = row_code.decode(row, it->second);
    res.decode_ok = res.decode_ok && d.ok;
    return d.x;
  };
  res.y = extract(concat_rows(bob_rows, bob_row), bob_seeds[res.c]);
  return res;
}

Bits run_ot(const FrotResult& frot, const Bits& m0, const Bits& m1, int choice, Transport& link)
{
  require(!frot.aborted, "oblivious transfer needs a completed randomized run");
  require(choice == 0 || choice == 1, "choice must be 0 or 1");
  require(m0.size() == frot.s0.size() && m1.size() == frot.s0.size(), "message length must equal ell");

  const std::uint8_t delta = static_cast<std::uint8_t>(choice ^ frot.c);
  link.send(to_alice, {MessageKind::ot_choice, {delta}});

  const auto msg = link.expect(to_alice, MessageKind::ot_choice);
  if (msg.payload.size() != 1 || msg.payload[0] > 1)
    throw ProtocolError("choice message must be a single bit");
  const int d = msg.payload[0];
  {
    Writer w;
    w.bits(m0 ^ (d == 0 ? frot.s0 : frot.s1));
    w.bits(m1 ^ (d == 0 ? frot.s1 : frot.s0));
    link.send(to_bob, {MessageKind::ot_payload, w.take()});
  }

  const auto reply = link.expect(to_bob, MessageKind::ot_payload);
  Reader r(reply.payload);
  const Bits e0 = r.bits(), e1 = r.bits();
  r.finish();
  if (e0.size() != frot.y.size() || e1.size() != frot.y.size())
    throw ProtocolError("payload length does not match ell");
  return (choice == 0 ? e0 : e1) ^ frot.y;
}

} // namespace nsm
