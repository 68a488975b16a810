#include "pcsi/net.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <exception>

#include "pcsi/error.h"

namespace pcsi {

namespace {

[[noreturn]] void throw_errno(const std::string& what) {
  throw Error(ErrorCode::kIo, what + ": " + std::strerror(errno));
}

// false on EOF before any byte was read.
bool read_exact(int fd, std::uint8_t* buf, std::size_t n, bool eof_ok) {
  std::size_t got = 0;
  while (got < n) {
    ssize_t r = ::recv(fd, buf + got, n - got, 0);
    if (r == 0) {
      if (got == 0 && eof_ok) return false;
      throw Error(ErrorCode::kIo, "connection closed mid-frame");
    }
    if (r < 0) {
      if (errno == EINTR) continue;
      throw_errno("recv");
    }
    got += static_cast<std::size_t>(r);
  }
  return true;
}

std::vector<std::uint8_t> error_frame(const std::string& reason) {
  return encode_frame(ErrorMsg{reason});
}

}  // namespace

Endpoint parse_endpoint(const std::string& text) {
  const auto colon = text.rfind(':');
  PCSI_CHECK(colon != std::string::npos && colon + 1 < text.size(), ErrorCode::kBadParams,
             "endpoint must be host:port, got '" + text + "'");
  Endpoint ep;
  ep.host = text.substr(0, colon);
  if (ep.host.empty()) ep.host = "127.0.0.1";
  const std::string port = text.substr(colon + 1);
  PCSI_CHECK(port.find_first_not_of("0123456789") == std::string::npos && port.size() <= 5,
             ErrorCode::kBadParams, "bad port in '" + text + "'");
  const unsigned long value = std::stoul(port);
  PCSI_CHECK(value <= 65535, ErrorCode::kBadParams, "bad port in '" + text + "'");
  ep.port = static_cast<std::uint16_t>(value);
  return ep;
}

std::vector<Endpoint> parse_endpoints(const std::string& text) {
  std::vector<Endpoint> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos
                                                                           : comma - start);
    if (!item.empty()) out.push_back(parse_endpoint(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

Connection::~Connection() {
  if (fd_ >= 0) ::close(fd_);
}

Connection Connection::connect_to(const Endpoint& endpoint) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(endpoint.port);
  const int rc = ::getaddrinfo(endpoint.host.c_str(), port.c_str(), &hints, &res);
  PCSI_CHECK(rc == 0, ErrorCode::kIo,
             "cannot resolve " + endpoint.to_string() + ": " + ::gai_strerror(rc));
  int fd = -1;
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  PCSI_CHECK(fd >= 0, ErrorCode::kIo, "cannot connect to " + endpoint.to_string());
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return Connection(fd);
}

void Connection::send_frame(std::span<const std::uint8_t> frame) {
  std::size_t sent = 0;
  while (sent < frame.size()) {
    ssize_t w = ::send(fd_, frame.data() + sent, frame.size() - sent, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw_errno("send");
    }
    sent += static_cast<std::size_t>(w);
  }
}

std::optional<std::vector<std::uint8_t>> Connection::recv_frame() {
  std::vector<std::uint8_t> frame(4);
  if (!read_exact(fd_, frame.data(), 4, true)) return std::nullopt;
  const std::uint32_t length = (std::uint32_t{frame[0]} << 24) | (std::uint32_t{frame[1]} << 16) |
                               (std::uint32_t{frame[2]} << 8) | std::uint32_t{frame[3]};
  PCSI_CHECK(length <= kMaxFrameBytes, ErrorCode::kTooLarge, "incoming frame too large");
  frame.resize(4 + std::size_t{length});
  read_exact(fd_, frame.data() + 4, length, false);
  return frame;
}

Message Connection::round_trip(const Message& request) {
  send_frame(encode_frame(request));
  auto reply = recv_frame();
  PCSI_CHECK(reply.has_value(), ErrorCode::kIo, "server closed the connection");
  return decode_frame(*reply);
}

FrameHandler database_handler(const Database& db) {
  return [&db](std::span<const std::uint8_t> frame) -> std::vector<std::uint8_t> {
    try {
      Message msg = decode_frame(frame);
      if (const auto* hello = std::get_if<Hello>(&msg)) {
        PCSI_CHECK(hello->prime == db.field().modulus() && hello->messages == db.messages() &&
                       hello->symbols == db.symbols(),
                   ErrorCode::kBadParams, "parameters do not match the stored database");
        return encode_frame(*hello);
      }
      if (const auto* query = std::get_if<ServerQuery>(&msg)) {
        ReducedAnswer ans = server_answer(db, *query);
        return encode_frame(AnswerMsg{static_cast<std::uint16_t>(db.field().modulus()), ans});
      }
      return error_frame("unexpected frame type");
    } catch (const std::exception& e) {
      return error_frame(e.what());
    }
  };
}

FrameServer::FrameServer(const Endpoint& listen, FrameHandler handler)
    : handler_(std::move(handler)) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(listen.port);
  const int rc = ::getaddrinfo(listen.host.c_str(), port.c_str(), &hints, &res);
  PCSI_CHECK(rc == 0, ErrorCode::kIo,
             "cannot resolve " + listen.to_string() + ": " + ::gai_strerror(rc));
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 64) == 0) {
      listen_fd_ = fd;
      break;
    }
    ::close(fd);
  }
  ::freeaddrinfo(res);
  PCSI_CHECK(listen_fd_ >= 0, ErrorCode::kIo, "cannot listen on " + listen.to_string());
  sockaddr_storage addr{};
  socklen_t len = sizeof(addr);
  if (::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
    throw_errno("getsockname");
  }
  if (addr.ss_family == AF_INET6) {
    port_ = ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port);
  } else {
    port_ = ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
  }
}

FrameServer::~FrameServer() {
  stop();
  for (auto& t : workers_) {
    if (t.joinable()) t.join();
  }
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void FrameServer::run() {
  while (!stopping_) {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR && !stopping_) continue;
      break;
    }
    std::lock_guard<std::mutex> lock(mu_);
    if (stopping_) {
      ::close(fd);
      break;
    }
    open_fds_.push_back(fd);
    workers_.emplace_back([this, fd] { serve_connection(fd); });
  }
}

void FrameServer::stop() {
  std::lock_guard<std::mutex> lock(mu_);
  if (stopping_.exchange(true)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  for (int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
}

void FrameServer::serve_connection(int fd) {
  Connection conn(fd);
  try {
    while (!stopping_) {
      std::optional<std::vector<std::uint8_t>> frame;
      try {
        frame = conn.recv_frame();
      } catch (const Error& e) {
        // The stream cannot be resynchronized after a bad length prefix.
        if (e.code() == ErrorCode::kTooLarge) conn.send_frame(error_frame(e.what()));
        break;
      }
      if (!frame) break;
      conn.send_frame(handler_(*frame));
    }
  } catch (const std::exception&) {
    // Peer went away; nothing to report to.
  }
  std::lock_guard<std::mutex> lock(mu_);
  std::erase(open_fds_, fd);
}

std::vector<ReducedAnswer> TcpTransport::exchange(const ProtocolParams& params,
                                                  const std::vector<ServerQuery>& queries) {
  PCSI_CHECK(queries.size() == endpoints_.size(), ErrorCode::kBadParams,
             "need exactly one endpoint per server");
  const Hello hello = hello_for(params);
  std::vector<ReducedAnswer> answers(queries.size());
  std::vector<std::exception_ptr> failures(queries.size());
  std::vector<std::thread> threads;
  for (std::size_t n = 0; n < queries.size(); ++n) {
    threads.emplace_back([&, n] {
      try {
        Connection conn = Connection::connect_to(endpoints_[n]);
        Message greeting = conn.round_trip(hello);
        if (const auto* err = std::get_if<ErrorMsg>(&greeting)) {
          throw Error(ErrorCode::kIo, "server " + std::to_string(n) + ": " + err->reason);
        }
        PCSI_CHECK(std::holds_alternative<Hello>(greeting), ErrorCode::kIo,
                   "server " + std::to_string(n) + " sent an unexpected greeting");
        Message reply = conn.round_trip(queries[n]);
        if (const auto* err = std::get_if<ErrorMsg>(&reply)) {
          throw Error(ErrorCode::kIo, "server " + std::to_string(n) + ": " + err->reason);
        }
        const auto* ans = std::get_if<AnswerMsg>(&reply);
        PCSI_CHECK(ans != nullptr, ErrorCode::kIo,
                   "server " + std::to_string(n) + " sent an unexpected reply");
        answers[n] = ans->answer;
      } catch (...) {
        failures[n] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return answers;
}

}  // namespace pcsi
