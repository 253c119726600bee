#pragma once

// Frame layout, little-endian:
//   u32 length (bytes after this field)
//   u8  type   1=Bcast 2=Fail 3=Fwd 4=Bwd 5=Heartbeat 6=Join
//   u32 round
//   u32 a      origin / failed / sender id
//   then for Bcast: LEB128 payload length, payload bytes
//   otherwise:      u32 b (detector; 0xFFFFFFFF when unused)

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "allconcur/protocol.hpp"

namespace allconcur {

class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FrameType : std::uint8_t { Bcast = 1, Fail = 2, Fwd = 3, Bwd = 4, Heartbeat = 5, Join = 6 };

/// First frame on every connection: announces the sender.
struct Join {
  Round round = 0;
  ServerId id = 0;
  friend bool operator==(const Join&, const Join&) = default;
};

using WireMessage = std::variant<Bcast, Fail, Fwd, Bwd, Heartbeat, Join>;

constexpr std::size_t kDefaultMaxPayload = std::size_t{1} << 20;
constexpr std::uint32_t kUnused = 0xFFFFFFFFu;

std::string encode(const WireMessage& msg);
std::string encode(const Message& msg);

/// Decodes exactly one complete frame; throws DecodeError otherwise.
WireMessage decode(std::string_view frame, std::size_t max_payload = kDefaultMaxPayload);

std::optional<Message> to_message(const WireMessage& msg);

/// Reassembles frames from a byte stream.
class FrameReader {
 public:
  explicit FrameReader(std::size_t max_payload = kDefaultMaxPayload) : max_payload_(max_payload) {}

  void feed(std::string_view bytes) { buffer_.append(bytes); }
  /// Next complete frame, nullopt when more bytes are needed. Throws
  /// DecodeError on malformed input; the stream is unusable afterwards.
  std::optional<WireMessage> next();
  std::size_t pending() const { return buffer_.size(); }

 private:
  std::size_t max_payload_;
  std::string buffer_;
};

}  // namespace allconcur
