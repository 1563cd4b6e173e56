#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "nsm/bits.hpp"

namespace nsm {

enum class Direction : std::uint8_t { alice_to_bob, bob_to_alice, none };

enum class MessageKind : std::uint8_t {
  missing_report = 1,
  basis_info = 2,
  surviving_rounds = 3,
  truncation = 4,
  permutation = 5,
  hash_query = 6,
  hash_answer = 7,
  syndromes = 8,
  hash_seeds = 9,
  ot_choice = 10,
  ot_payload = 11,
  abort = 12,
  wait = 13,
};

std::string to_string(MessageKind kind);
MessageKind parse_message_kind(const std::string& s);
std::string to_string(Direction dir);

struct Message {
  MessageKind kind;
  std::vector<std::uint8_t> payload;
};

// Length-prefixed frame: u32 LE length of (kind + payload), kind byte, payload.
std::vector<std::uint8_t> encode_frame(const Message& msg);
Message decode_frame(const std::vector<std::uint8_t>& bytes, std::size_t& offset);

struct TranscriptRecord {
  std::uint64_t seq;
  Direction dir;
  MessageKind kind;
  std::vector<std::uint8_t> payload;

  bool operator==(const TranscriptRecord&) const = default;
};

// In-memory authenticated classical channel with a wait marker. Every frame is
// recorded; the transcript can be dumped and parsed back.
class Transport {
public:
  void send(Direction dir, const Message& msg);
  Message receive(Direction dir);
  // Receives and checks the kind; an abort message becomes a ProtocolError.
  Message expect(Direction dir, MessageKind kind);
  bool pending(Direction dir) const;
  void wait();

  const std::vector<TranscriptRecord>& transcript() const { return log_; }
  std::string dump() const;
  static std::vector<TranscriptRecord> parse(const std::string& text);

private:
  std::deque<std::vector<std::uint8_t>> to_bob_;
  std::deque<std::vector<std::uint8_t>> to_alice_;
  std::vector<TranscriptRecord> log_;
};

std::string to_hex(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> from_hex(const std::string& s);

// Payload helpers.
class Writer {
public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v);
  void bits(const Bits& b);
  void u32s(const std::vector<std::uint32_t>& v);
  std::vector<std::uint8_t> take() { return std::move(out_); }

private:
  std::vector<std::uint8_t> out_;
};

class Reader {
public:
  explicit Reader(const std::vector<std::uint8_t>& in) : in_(in) {}
  std::uint8_t u8();
  std::uint32_t u32();
  Bits bits();
  std::vector<std::uint32_t> u32s();
  bool done() const { return pos_ == in_.size(); }
  void finish() const;   // throws if bytes remain

private:
  const std::vector<std::uint8_t>& in_;
  std::size_t pos_ = 0;
};

} // namespace nsm
