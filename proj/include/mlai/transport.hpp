#pragma once

// reliable ordered byte streams the protocol runs over: an in-process
// loopback for the simulator, and fd-backed streams (socketpair, TCP on
// 127.0.0.1) so the same framing code can be exercised over real sockets.

#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace mlai {

class ByteStream {
 public:
  virtual ~ByteStream() = default;

  // appends the whole buffer to the stream
  virtual void send(std::span<const std::uint8_t> bytes) = 0;

  // drains whatever has arrived; empty when nothing is pending. never blocks.
  virtual std::vector<std::uint8_t> receive_available() = 0;
};

// two endpoints sharing in-memory buffers; bytes sent on one side come out of
// the other in order. safe to use from two threads.
std::pair<std::unique_ptr<ByteStream>, std::unique_ptr<ByteStream>> make_loopback();

class FdStream : public ByteStream {
 public:
  explicit FdStream(int fd);  // takes ownership
  ~FdStream() override;
  FdStream(const FdStream&) = delete;
  FdStream& operator=(const FdStream&) = delete;

  void send(std::span<const std::uint8_t> bytes) override;
  std::vector<std::uint8_t> receive_available() override;

  // true once data is readable, false on timeout
  bool wait_readable(int timeout_ms);

  int fd() const { return fd_; }

 private:
  int fd_;
};

std::pair<std::unique_ptr<FdStream>, std::unique_ptr<FdStream>> make_socketpair();

class TcpListener {
 public:
  explicit TcpListener(std::uint16_t port = 0);  // 0 picks an ephemeral port
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }
  std::unique_ptr<FdStream> accept();

 private:
  int fd_;
  std::uint16_t port_;
};

std::unique_ptr<FdStream> tcp_connect(std::uint16_t port);

}  // namespace mlai
