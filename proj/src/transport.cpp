#include "mlai/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>
#include <stdexcept>
#include <string>

namespace mlai {

namespace {

[[noreturn]] void throw_errno(const std::string& what) {
  throw std::runtime_error(what + ": " + std::strerror(errno));
}

struct LoopbackBuffer {
  std::mutex mu;
  std::vector<std::uint8_t> bytes;
};

class LoopbackEndpoint : public ByteStream {
 public:
  LoopbackEndpoint(std::shared_ptr<LoopbackBuffer> out, std::shared_ptr<LoopbackBuffer> in)
      : out_(std::move(out)), in_(std::move(in)) {}

  void send(std::span<const std::uint8_t> bytes) override {
    std::lock_guard lock(out_->mu);
    out_->bytes.insert(out_->bytes.end(), bytes.begin(), bytes.end());
  }

  std::vector<std::uint8_t> receive_available() override {
    std::lock_guard lock(in_->mu);
    std::vector<std::uint8_t> got;
    got.swap(in_->bytes);
    return got;
  }

 private:
  std::shared_ptr<LoopbackBuffer> out_;
  std::shared_ptr<LoopbackBuffer> in_;
};

}  // namespace

std::pair<std::unique_ptr<ByteStream>, std::unique_ptr<ByteStream>> make_loopback() {
  auto ab = std::make_shared<LoopbackBuffer>();
  auto ba = std::make_shared<LoopbackBuffer>();
  return {std::make_unique<LoopbackEndpoint>(ab, ba),
          std::make_unique<LoopbackEndpoint>(ba, ab)};
}

FdStream::FdStream(int fd) : fd_(fd) {
  if (fd_ < 0) throw std::invalid_argument("FdStream needs a valid descriptor");
}

FdStream::~FdStream() {
  if (fd_ >= 0) ::close(fd_);
}

void FdStream::send(std::span<const std::uint8_t> bytes) {
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_errno("send");
    }
    sent += std::size_t(n);
  }
}

std::vector<std::uint8_t> FdStream::receive_available() {
  std::vector<std::uint8_t> out;
  std::uint8_t chunk[4096];
  for (;;) {
    ssize_t n = ::recv(fd_, chunk, sizeof chunk, MSG_DONTWAIT);
    if (n > 0) {
      out.insert(out.end(), chunk, chunk + n);
      continue;
    }
    if (n == 0) break;  // peer closed
    if (errno == EAGAIN || errno == EWOULDBLOCK) break;
    if (errno == EINTR) continue;
    throw_errno("recv");
  }
  return out;
}

bool FdStream::wait_readable(int timeout_ms) {
  pollfd p{fd_, POLLIN, 0};
  for (;;) {
    int n = ::poll(&p, 1, timeout_ms);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_errno("poll");
    }
    return n > 0;
  }
}

std::pair<std::unique_ptr<FdStream>, std::unique_ptr<FdStream>> make_socketpair() {
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0) throw_errno("socketpair");
  return {std::make_unique<FdStream>(fds[0]), std::make_unique<FdStream>(fds[1])};
}

TcpListener::TcpListener(std::uint16_t port) : fd_(-1), port_(0) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw_errno("socket");
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) throw_errno("bind");
  if (::listen(fd_, 8) != 0) throw_errno("listen");
  socklen_t len = sizeof addr;
  if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0)
    throw_errno("getsockname");
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<FdStream> TcpListener::accept() {
  for (;;) {
    int fd = ::accept(fd_, nullptr, nullptr);
    if (fd >= 0) return std::make_unique<FdStream>(fd);
    if (errno == EINTR) continue;
    throw_errno("accept");
  }
}

std::unique_ptr<FdStream> tcp_connect(std::uint16_t port) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw_errno("socket");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    int saved = errno;
    ::close(fd);
    errno = saved;
    throw_errno("connect");
  }
  return std::make_unique<FdStream>(fd);
}

}  // namespace mlai
