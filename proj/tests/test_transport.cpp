#include "mlai/transport.hpp"

#include "doctest.h"

#include <chrono>
#include <cstdint>
#include <thread>
#include <vector>

#include "mlai/protocol.hpp"
#include "mlai/rng.hpp"

namespace {

using namespace mlai;

std::vector<std::uint8_t> bytes_of(std::initializer_list<int> vals) {
  std::vector<std::uint8_t> out;
  for (int v : vals) out.push_back(std::uint8_t(v));
  return out;
}

// drain one endpoint until the expected byte count arrives or patience runs out
std::vector<std::uint8_t> drain_until(ByteStream& s, std::size_t expect) {
  std::vector<std::uint8_t> got;
  for (int spin = 0; spin < 20000 && got.size() < expect; ++spin) {
    auto chunk = s.receive_available();
    got.insert(got.end(), chunk.begin(), chunk.end());
    if (chunk.empty()) std::this_thread::sleep_for(std::chrono::microseconds(50));
  }
  return got;
}

}  // namespace

TEST_SUITE("transport") {

TEST_CASE("loopback delivers bytes in order, per direction") {
  auto [a, b] = make_loopback();

  CHECK(a->receive_available().empty());

  a->send(bytes_of({1, 2, 3}));
  a->send(bytes_of({4, 5}));
  CHECK(b->receive_available() == bytes_of({1, 2, 3, 4, 5}));
  CHECK(b->receive_available().empty());  // drained

  // the reverse direction is an independent channel
  b->send(bytes_of({9}));
  CHECK(a->receive_available() == bytes_of({9}));
  CHECK(b->receive_available().empty());
}

TEST_CASE("loopback is safe across threads") {
  auto [a, b] = make_loopback();
  constexpr int kMessages = 2000;

  std::thread producer([&a] {
    for (int i = 0; i < kMessages; ++i) {
      std::uint8_t v = std::uint8_t(i & 0xFF);
      a->send(std::vector<std::uint8_t>{v, v, v});
    }
  });

  auto got = drain_until(*b, kMessages * 3);
  producer.join();
  auto rest = b->receive_available();
  got.insert(got.end(), rest.begin(), rest.end());

  REQUIRE(got.size() == kMessages * 3);
  for (int i = 0; i < kMessages; ++i) {
    CHECK(got[std::size_t(i) * 3] == std::uint8_t(i & 0xFF));
    CHECK(got[std::size_t(i) * 3 + 2] == std::uint8_t(i & 0xFF));
  }
}

TEST_CASE("socketpair streams bytes through real descriptors") {
  auto [a, b] = make_socketpair();

  a->send(bytes_of({10, 20, 30}));
  CHECK(a->wait_readable(0) == false);  // nothing coming back yet
  CHECK(b->wait_readable(1000));
  CHECK(drain_until(*b, 3) == bytes_of({10, 20, 30}));

  b->send(bytes_of({7}));
  CHECK(a->wait_readable(1000));
  CHECK(drain_until(*a, 1) == bytes_of({7}));
}

TEST_CASE("a megabyte crosses a socketpair intact") {
  auto [a, b] = make_socketpair();
  Rng rng(71);
  std::vector<std::uint8_t> blob(1 << 20);
  for (auto& v : blob) v = std::uint8_t(rng.below(256));

  // the kernel buffer is far smaller than the blob, so the writer must run
  // on its own thread while this one drains
  std::thread producer([&a, &blob] { a->send(blob); });
  auto got = drain_until(*b, blob.size());
  producer.join();

  CHECK(got == blob);
}

TEST_CASE("framed messages reassemble over a socketpair") {
  auto [a, b] = make_socketpair();
  Rng rng(72);

  std::vector<Message> sent;
  for (int i = 0; i < 40; ++i) {
    Message m;
    m.kind = MessageKind(rng.uniform_int(1, 9));
    m.sequence = std::uint64_t(i) + 1;
    m.sender = 4;
    m.payload.resize(std::size_t(rng.uniform_int(0, 3000)));
    for (auto& v : m.payload) v = std::uint8_t(rng.below(256));
    sent.push_back(std::move(m));
  }

  std::thread producer([&a, &sent] {
    for (const auto& m : sent) a->send(frame_message(m));
  });

  FrameReader reader;
  std::vector<Message> got;
  while (got.size() < sent.size()) {
    b->wait_readable(1000);
    reader.feed(b->receive_available());
    while (auto m = reader.next()) got.push_back(*m);
  }
  producer.join();
  CHECK(got == sent);
  CHECK(reader.buffered() == 0);
}

TEST_CASE("tcp on localhost carries the same contract") {
  TcpListener listener;
  CHECK(listener.port() != 0);

  std::unique_ptr<FdStream> server;
  std::thread acceptor([&listener, &server] { server = listener.accept(); });
  auto client = tcp_connect(listener.port());
  acceptor.join();
  REQUIRE(server != nullptr);

  client->send(bytes_of({1, 2, 3, 4}));
  CHECK(drain_until(*server, 4) == bytes_of({1, 2, 3, 4}));

  Message m;
  m.kind = MessageKind::Telemetry;
  m.sequence = 1;
  m.sender = 9;
  m.payload = bytes_of({5, 6, 7});
  server->send(frame_message(m));

  FrameReader reader;
  reader.feed(drain_until(*client, frame_message(m).size()));
  auto got = reader.next();
  REQUIRE(got.has_value());
  CHECK(*got == m);
}

TEST_CASE("fd stream rejects a negative descriptor") {
  CHECK_THROWS_AS(FdStream(-1), std::invalid_argument);
}

}  // TEST_SUITE
