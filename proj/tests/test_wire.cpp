#include <gtest/gtest.h>

#include <random>

#include "allconcur/wire.hpp"

using namespace allconcur;

TEST(Wire, EmptyBcastFrame) {
  const std::string f = encode(Message{Bcast{1, 0, ""}});
  ASSERT_EQ(f.size(), 14u);
  EXPECT_EQ(static_cast<std::uint8_t>(f[4]), 1u);
  EXPECT_EQ(static_cast<std::uint8_t>(f[0]), 10u);
  EXPECT_EQ(decode(f), (WireMessage{Bcast{1, 0, ""}}));
}

TEST(Wire, FailBodyIsThirteenBytes) {
  const std::string f = encode(Message{Fail{2, 3, 5}});
  ASSERT_EQ(f.size(), 4u + 13u);
  EXPECT_EQ(static_cast<std::uint8_t>(f[0]), 13u);
  EXPECT_EQ(static_cast<std::uint8_t>(f[4]), 2u);
  EXPECT_EQ(static_cast<std::uint8_t>(f[5]), 2u);  // round, little-endian
  EXPECT_EQ(static_cast<std::uint8_t>(f[9]), 3u);
  EXPECT_EQ(static_cast<std::uint8_t>(f[13]), 5u);
}

TEST(Wire, UnusedDetectorField) {
  const std::string f = encode(Message{Fwd{4, 1}});
  EXPECT_EQ(f.substr(13, 4), std::string(4, '\xff'));
}

TEST(Wire, AllTypesRoundTrip) {
  const std::vector<WireMessage> msgs{Bcast{7, 2, std::string(300, 'x')}, Fail{1, 2, 3}, Fwd{5, 6}, Bwd{8, 9},
                                      Heartbeat{11}, Join{0, 4}};
  for (const auto& m : msgs) EXPECT_EQ(decode(encode(m)), m);
  EXPECT_EQ(to_message(Join{0, 4}), std::nullopt);
  EXPECT_EQ(to_message(Fail{1, 2, 3}), (Message{Fail{1, 2, 3}}));
}

TEST(Wire, TruncatedFrameRejected) {
  const std::string f = encode(Message{Bcast{1, 0, "payload"}});
  for (std::size_t len = 0; len < f.size(); ++len) {
    EXPECT_THROW(decode(std::string_view(f).substr(0, len)), DecodeError) << len;
  }
}

TEST(Wire, CorruptionRejected) {
  std::string bad_type = encode(Message{Fail{1, 2, 3}});
  bad_type[4] = 9;
  EXPECT_THROW(decode(bad_type), DecodeError);
  std::string trailing = encode(Message{Fail{1, 2, 3}}) + "x";
  EXPECT_THROW(decode(trailing), DecodeError);
  const std::string big = encode(Message{Bcast{1, 0, std::string(100, 'y')}});
  EXPECT_THROW(decode(big, 10), DecodeError);
}

TEST(FrameReader, ReassemblesArbitrarySplits) {
  std::vector<WireMessage> msgs;
  std::string stream;
  for (std::uint32_t i = 0; i < 50; ++i) {
    msgs.push_back(Bcast{i, i % 7, std::string(i * 3, 'a' + static_cast<char>(i % 26))});
    msgs.push_back(Fail{i, i + 1, i + 2});
    for (std::size_t j = msgs.size() - 2; j < msgs.size(); ++j) stream += encode(msgs[j]);
  }
  std::mt19937_64 rng(8);
  FrameReader reader;
  std::vector<WireMessage> got;
  std::size_t at = 0;
  while (at < stream.size()) {
    const std::size_t chunk = std::min<std::size_t>(1 + rng() % 40, stream.size() - at);
    reader.feed(std::string_view(stream).substr(at, chunk));
    at += chunk;
    while (auto m = reader.next()) got.push_back(*m);
  }
  EXPECT_EQ(got, msgs);
  EXPECT_EQ(reader.pending(), 0u);
}

TEST(FrameReader, PartialFrameSurfacesNothing) {
  const std::string f = encode(Message{Bcast{1, 0, "abc"}});
  FrameReader reader;
  reader.feed(std::string_view(f).substr(0, f.size() - 1));
  EXPECT_FALSE(reader.next().has_value());
  reader.feed(std::string_view(f).substr(f.size() - 1));
  EXPECT_TRUE(reader.next().has_value());
}
