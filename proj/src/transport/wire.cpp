#include "allconcur/wire.hpp"

namespace allconcur {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr std::size_t kFixedFields = 1 + 4 + 4;  // type, round, a

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(std::string_view in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return v;
}

void put_varint(std::string& out, std::uint64_t v) {
  do {
    auto byte = static_cast<unsigned char>(v & 0x7F);
    v >>= 7;
    if (v != 0) byte |= 0x80;
    out.push_back(static_cast<char>(byte));
  } while (v != 0);
}

std::string frame(FrameType type, std::uint32_t round, std::uint32_t a, std::uint32_t b) {
  std::string out;
  put_u32(out, kFixedFields + 4);
  out.push_back(static_cast<char>(type));
  put_u32(out, round);
  put_u32(out, a);
  put_u32(out, b);
  return out;
}

}  // namespace

std::string encode(const WireMessage& msg) {
  return std::visit(Overloaded{
                        [](const Bcast& m) {
                          std::string body;
                          body.push_back(static_cast<char>(FrameType::Bcast));
                          put_u32(body, m.round);
                          put_u32(body, m.origin);
                          put_varint(body, m.payload.size());
                          body += m.payload;
                          std::string out;
                          put_u32(out, static_cast<std::uint32_t>(body.size()));
                          return out + body;
                        },
                        [](const Fail& m) { return frame(FrameType::Fail, m.round, m.failed, m.detector); },
                        [](const Fwd& m) { return frame(FrameType::Fwd, m.round, m.origin, kUnused); },
                        [](const Bwd& m) { return frame(FrameType::Bwd, m.round, m.origin, kUnused); },
                        [](const Heartbeat& m) { return frame(FrameType::Heartbeat, 0, m.from, kUnused); },
                        [](const Join& m) { return frame(FrameType::Join, m.round, m.id, kUnused); },
                    },
                    msg);
}

std::string encode(const Message& msg) {
  return std::visit([](const auto& m) { return encode(WireMessage{m}); }, msg);
}

WireMessage decode(std::string_view in, std::size_t max_payload) {
  if (in.size() < 4) throw DecodeError("short read: missing length field");
  const std::uint32_t length = get_u32(in, 0);
  if (in.size() - 4 < length) throw DecodeError("short read: frame truncated");
  if (in.size() - 4 > length) throw DecodeError("trailing bytes after frame");
  if (length < kFixedFields) throw DecodeError("frame too short for its header");
  const std::string_view body = in.substr(4);
  const auto type = static_cast<unsigned char>(body[0]);
  const std::uint32_t round = get_u32(body, 1);
  const std::uint32_t a = get_u32(body, 5);

  if (type == static_cast<unsigned char>(FrameType::Bcast)) {
    std::size_t pos = kFixedFields;
    std::uint64_t size = 0;
    int shift = 0;
    while (true) {
      if (pos >= body.size()) throw DecodeError("short read: payload length");
      const auto byte = static_cast<unsigned char>(body[pos++]);
      if (shift >= 35) throw DecodeError("payload length varint too long");
      size |= static_cast<std::uint64_t>(byte & 0x7F) << shift;
      if ((byte & 0x80) == 0) break;
      shift += 7;
    }
    if (size > max_payload) throw DecodeError("payload of " + std::to_string(size) + " bytes exceeds the limit");
    if (body.size() - pos != size) throw DecodeError("payload length does not match frame length");
    return Bcast{round, a, std::string(body.substr(pos))};
  }

  if (type < 2 || type > 6) throw DecodeError("bad frame type " + std::to_string(type));
  if (length != kFixedFields + 4) throw DecodeError("fixed-size frame has wrong length");
  const std::uint32_t b = get_u32(body, 9);
  const auto ft = static_cast<FrameType>(type);
  if (ft == FrameType::Fail) return Fail{round, a, b};
  if (b != kUnused) throw DecodeError("unused field must be 0xFFFFFFFF");
  switch (ft) {
    case FrameType::Fwd: return Fwd{round, a};
    case FrameType::Bwd: return Bwd{round, a};
    case FrameType::Heartbeat:
      if (round != 0) throw DecodeError("heartbeat frames carry round 0");
      return Heartbeat{a};
    default: return Join{round, a};
  }
}

std::optional<Message> to_message(const WireMessage& msg) {
  return std::visit(Overloaded{
                        [](const Join&) -> std::optional<Message> { return std::nullopt; },
                        [](const auto& m) -> std::optional<Message> { return Message{m}; },
                    },
                    msg);
}

std::optional<WireMessage> FrameReader::next() {
  if (buffer_.size() < 4) return std::nullopt;
  const std::uint32_t length = get_u32(buffer_, 0);
  // a varint can add up to 5 bytes on top of the payload
  if (length > max_payload_ + kFixedFields + 5) throw DecodeError("frame length exceeds the limit");
  if (buffer_.size() < 4 + static_cast<std::size_t>(length)) return std::nullopt;
  auto msg = decode(std::string_view(buffer_).substr(0, 4 + length), max_payload_);
  buffer_.erase(0, 4 + length);
  return msg;
}

}  // namespace allconcur
