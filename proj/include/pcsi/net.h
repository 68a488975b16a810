#pragma once

// TCP plumbing: blocking frame I/O, a thread-per-connection frame server and
// a transport that queries N remote servers concurrently.

#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "pcsi/database.h"
#include "pcsi/protocol.h"
#include "pcsi/wire.h"

namespace pcsi {

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;

  std::string to_string() const { return host + ":" + std::to_string(port); }
};

// "host:port"; BadParams otherwise.
Endpoint parse_endpoint(const std::string& text);
// Comma-separated list of endpoints.
std::vector<Endpoint> parse_endpoints(const std::string& text);

class Connection {
 public:
  explicit Connection(int fd) : fd_(fd) {}
  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;
  Connection(Connection&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
  ~Connection();

  static Connection connect_to(const Endpoint& endpoint);

  void send_frame(std::span<const std::uint8_t> frame);
  // The complete frame including its length prefix; nullopt on a clean EOF
  // before the first byte. TooLarge when the prefix exceeds kMaxFrameBytes.
  std::optional<std::vector<std::uint8_t>> recv_frame();
  // Sends one message and decodes the reply.
  Message round_trip(const Message& request);

  int fd() const { return fd_; }

 private:
  int fd_;
};

// Maps one request frame to one reply frame.
using FrameHandler = std::function<std::vector<std::uint8_t>(std::span<const std::uint8_t>)>;

// Answers HELLO (checked against the database shape) and QUERY frames; any
// failure becomes an ERROR frame.
FrameHandler database_handler(const Database& db);

class FrameServer {
 public:
  // Binds immediately; port 0 picks a free port.
  FrameServer(const Endpoint& listen, FrameHandler handler);
  ~FrameServer();
  FrameServer(const FrameServer&) = delete;
  FrameServer& operator=(const FrameServer&) = delete;

  std::uint16_t port() const { return port_; }
  // Accepts connections until stop() is called.
  void run();
  void stop();

 private:
  void serve_connection(int fd);

  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  FrameHandler handler_;
  std::atomic<bool> stopping_{false};
  std::mutex mu_;
  std::vector<int> open_fds_;
  std::vector<std::thread> workers_;
};

// One connection per server per exchange, all servers queried concurrently.
class TcpTransport : public Transport {
 public:
  explicit TcpTransport(std::vector<Endpoint> endpoints) : endpoints_(std::move(endpoints)) {}
  std::vector<ReducedAnswer> exchange(const ProtocolParams& params,
                                      const std::vector<ServerQuery>& queries) override;

 private:
  std::vector<Endpoint> endpoints_;
};

}  // namespace pcsi
