#include "nsm/transport.hpp"

#include <array>
#include <sstream>

#include "nsm/error.hpp"

namespace nsm {

namespace {

constexpr std::array<const char*, 13> kind_names = {
    "missing_report", "basis_info", "surviving_rounds", "truncation", "permutation",
    "hash_query",     "hash_answer", "syndromes",       "hash_seeds", "ot_choice",
    "ot_payload",     "abort",       "wait"};

bool valid_kind(std::uint8_t k) { return k >= 1 && k <= kind_names.size(); }

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t pos)
{
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= std::uint32_t(in[pos + i]) << (8 * i);
  return v;
}

} // namespace

std::string to_string(MessageKind kind)
{
  const auto k = static_cast<std::uint8_t>(kind);
  if (!valid_kind(k))
    throw ProtocolError("unknown message kind " + std::to_string(k));
  return kind_names[k - 1];
}

MessageKind parse_message_kind(const std::string& s)
{
  for (std::size_t i = 0; i < kind_names.size(); ++i)
    if (s == kind_names[i])
      return static_cast<MessageKind>(i + 1);
  throw ProtocolError("unknown message kind '" + s + "'");
}

std::string to_string(Direction dir)
{
  switch (dir) {
  case Direction::alice_to_bob: return "A->B";
  case Direction::bob_to_alice: return "B->A";
  case Direction::none: return "--";
  }
  return "?";
}

std::vector<std::uint8_t> encode_frame(const Message& msg)
{
  std::vector<std::uint8_t> out;
  out.reserve(msg.payload.size() + 5);
  put_u32(out, static_cast<std::uint32_t>(msg.payload.size() + 1));
  out.push_back(static_cast<std::uint8_t>(msg.kind));
  out.insert(out.end(), msg.payload.begin(), msg.payload.end());
  return out;
}

Message decode_frame(const std::vector<std::uint8_t>& bytes, std::size_t& offset)
{
  if (offset + 5 > bytes.size())
    throw ProtocolError("truncated frame header");
  const std::uint32_t len = get_u32(bytes, offset);
  if (len < 1 || offset + 4 + len > bytes.size())
    throw ProtocolError("frame length out of range");
  const std::uint8_t kind = bytes[offset + 4];
  if (!valid_kind(kind))
    throw ProtocolError("unknown message kind " + std::to_string(kind));
  Message msg{static_cast<MessageKind>(kind),
              {bytes.begin() + offset + 5, bytes.begin() + offset + 4 + len}};
  offset += 4 + len;
  return msg;
}

void Transport::send(Direction dir, const Message& msg)
{
  if (dir == Direction::none)
    throw ProtocolError("message without direction");
  (dir == Direction::alice_to_bob ? to_bob_ : to_alice_).push_back(encode_frame(msg));
  log_.push_back({log_.size(), dir, msg.kind, msg.payload});
}

Message Transport::receive(Direction dir)
{
  auto& queue = dir == Direction::alice_to_bob ? to_bob_ : to_alice_;
  if (dir == Direction::none || queue.empty())
    throw ProtocolError("no message pending");
  const auto frame = std::move(queue.front());
  queue.pop_front();
  std::size_t off = 0;
  auto msg = decode_frame(frame, off);
  if (off != frame.size())
    throw ProtocolError("trailing bytes after frame");
  return msg;
}

Message Transport::expect(Direction dir, MessageKind kind)
{
  auto msg = receive(dir);
  if (msg.kind == MessageKind::abort)
    throw ProtocolError("peer aborted: " + std::string(msg.payload.begin(), msg.payload.end()));
  if (msg.kind != kind)
    throw ProtocolError("expected " + to_string(kind) + ", got " + to_string(msg.kind));
  return msg;
}

bool Transport::pending(Direction dir) const
{
  return !(dir == Direction::alice_to_bob ? to_bob_ : to_alice_).empty();
}

void Transport::wait() { log_.push_back({log_.size(), Direction::none, MessageKind::wait, {}}); }

std::string Transport::dump() const
{
  std::ostringstream os;
  for (const auto& r : log_)
    os << r.seq << ", " << to_string(r.dir) << ", " << to_string(r.kind) << ", " << to_hex(r.payload) << '\n';
  return os.str();
}

std::vector<TranscriptRecord> Transport::parse(const std::string& text)
{
  std::vector<TranscriptRecord> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty())
      continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t pos; (pos = line.find(", ", start)) != std::string::npos; start = pos + 2)
      fields.push_back(line.substr(start, pos - start));
    fields.push_back(line.substr(start));
    if (fields.size() != 4)
      throw ProtocolError("malformed transcript line: " + line);
    TranscriptRecord r;
    try {
      r.seq = std::stoull(fields[0]);
    } catch (const std::exception&) {
      throw ProtocolError("malformed sequence number: " + fields[0]);
    }
    if (fields[1] == "A->B")
      r.dir = Direction::alice_to_bob;
    else if (fields[1] == "B->A")
      r.dir = Direction::bob_to_alice;
    else if (fields[1] == "--")
      r.dir = Direction::none;
    else
      throw ProtocolError("malformed direction: " + fields[1]);
    r.kind = parse_message_kind(fields[2]);
    r.payload = from_hex(fields[3]);
    out.push_back(std::move(r));
  }
  return out;
}

std::string to_hex(const std::vector<std::uint8_t>& bytes)
{
  static constexpr char digits[] = "0123456789abcdef";
  std::string s;
  s.reserve(2 * bytes.size());
  for (auto b : bytes) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 15]);
  }
  return s;
}

std::vector<std::uint8_t> from_hex(const std::string& s)
{
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9')
      return c - '0';
    if (c >= 'a' && c <= 'f')
      return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
      return c - 'A' + 10;
    throw ProtocolError(std::string("bad hex digit '") + c + "'");
  };
  if (s.size() % 2)
    throw ProtocolError("odd-length hex string");
  std::vector<std::uint8_t> out(s.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<std::uint8_t>(nibble(s[2 * i]) << 4 | nibble(s[2 * i + 1]));
  return out;
}

void Writer::u32(std::uint32_t v) { put_u32(out_, v); }

void Writer::bits(const Bits& b)
{
  u32(static_cast<std::uint32_t>(b.size()));
  const auto packed = pack_bits(b);
  out_.insert(out_.end(), packed.begin(), packed.end());
}

void Writer::u32s(const std::vector<std::uint32_t>& v)
{
  u32(static_cast<std::uint32_t>(v.size()));
  for (auto x : v)
    u32(x);
}

std::uint8_t Reader::u8()
{
  if (pos_ + 1 > in_.size())
    throw ProtocolError("truncated payload");
  return in_[pos_++];
}

std::uint32_t Reader::u32()
{
  if (pos_ + 4 > in_.size())
    throw ProtocolError("truncated payload");
  const auto v = get_u32(in_, pos_);
  pos_ += 4;
  return v;
}

Bits Reader::bits()
{
  const std::size_t n = u32();
  const std::size_t bytes = (n + 7) / 8;
  if (pos_ + bytes > in_.size())
    throw ProtocolError("truncated payload");
  std::vector<std::uint8_t> chunk(in_.begin() + pos_, in_.begin() + pos_ + bytes);
  pos_ += bytes;
  return unpack_bits(chunk, n);
}

std::vector<std::uint32_t> Reader::u32s()
{
  const std::size_t n = u32();
  if (pos_ + 4 * n > in_.size())
    throw ProtocolError("truncated payload");
  std::vector<std::uint32_t> v(n);
  for (auto& x : v)
    x = u32();
  return v;
}

void Reader::finish() const
{
  if (!done())
    throw ProtocolError("unexpected trailing payload bytes");
}

} // namespace nsm
