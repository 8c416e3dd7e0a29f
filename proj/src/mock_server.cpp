#include "tailmeter/mock_server.hpp"

#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <stdexcept>
#include <system_error>
#include <utility>

#include "tailmeter/protocol.hpp"
#include "tailmeter/rng.hpp"

namespace tailmeter {

namespace {

void throw_errno(const char* what) {
  throw std::system_error(errno, std::generic_category(), what);
}

bool send_all(int fd, std::string_view data) {
  while (!data.empty()) {
    ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<size_t>(n));
  }
  return true;
}

}  // namespace

struct MockServer::Connection {
  int fd;
  std::thread thread;
  std::atomic<bool> done{false};
};

MockServer::MockServer(MockServerConfig config) : config_(std::move(config)) {}

MockServer::~MockServer() { stop(); }

void MockServer::start() {
  if (config_.max_items == 0) throw std::invalid_argument("store capacity must be >= 1");
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw_errno("socket");

  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(config_.port);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
    int saved = errno;
    ::close(listen_fd_);
    listen_fd_ = -1;
    errno = saved;
    throw_errno("bind");
  }
  if (::listen(listen_fd_, 128) < 0) throw_errno("listen");

  socklen_t len = sizeof(addr);
  if (::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len) < 0) {
    throw_errno("getsockname");
  }
  port_ = ntohs(addr.sin_port);

  running_.store(true);
  accept_thread_ = std::thread([this] { accept_loop(); });
}

void MockServer::stop() {
  bool was_running = running_.exchange(false);
  if (listen_fd_ >= 0) {
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
  if (accept_thread_.joinable()) accept_thread_.join();
  if (!was_running && connections_.empty()) return;

  std::vector<std::unique_ptr<Connection>> connections;
  {
    std::lock_guard lock(connections_mutex_);
    connections.swap(connections_);
  }
  for (auto& conn : connections) {
    ::shutdown(conn->fd, SHUT_RDWR);
  }
  for (auto& conn : connections) {
    if (conn->thread.joinable()) conn->thread.join();
    ::close(conn->fd);
  }
}

void MockServer::accept_loop() {
  while (running_.load()) {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      break;  // listener closed by stop()
    }
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));

    auto conn = std::make_unique<Connection>();
    conn->fd = fd;
    Connection* raw = conn.get();
    uint64_t id;
    {
      std::lock_guard lock(connections_mutex_);
      id = next_connection_id_++;
      // Occasionally sweep finished connections so long runs do not pile up
      // joinable threads.
      if (connections_.size() % 64 == 63) {
        std::erase_if(connections_, [](const std::unique_ptr<Connection>& c) {
          if (!c->done.load()) return false;
          if (c->thread.joinable()) c->thread.join();
          ::close(c->fd);
          return true;
        });
      }
      connections_.push_back(std::move(conn));
    }
    raw->thread = std::thread([this, raw, id] {
      serve(raw->fd, id);
      raw->done.store(true);
    });
  }
}

void MockServer::serve(int fd, uint64_t connection_id) {
  Rng rng(Rng::fold(config_.seed, connection_id));
  std::string buffer;
  char chunk[65536];

  auto inject_delay = [&] {
    if (!config_.delay) return;
    double seconds = config_.delay->sample(rng);
    if (seconds > 0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
    }
  };

  while (running_.load()) {
    ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return;
    buffer.append(chunk, static_cast<size_t>(n));

    size_t offset = 0;
    while (true) {
      memproto::Request request;
      size_t consumed = memproto::parse_request(
          std::string_view(buffer).substr(offset), request);
      if (consumed == 0) {
        if (request.kind == memproto::RequestKind::Malformed) return;
        break;  // incomplete, wait for more bytes
      }
      offset += consumed;
      requests_served_.fetch_add(1);
      inject_delay();

      std::string reply;
      switch (request.kind) {
        case memproto::RequestKind::Get: {
          std::lock_guard lock(store_mutex_);
          auto it = store_.find(request.key);
          if (it == store_.end()) {
            reply = "END\r\n";
          } else {
            reply = "VALUE " + request.key + " " + std::to_string(it->second.flags) + " " +
                    std::to_string(it->second.value.size()) + "\r\n" + it->second.value +
                    "\r\nEND\r\n";
          }
          break;
        }
        case memproto::RequestKind::Set: {
          if (request.value.size() > config_.max_value_bytes) {
            reply = "ERROR\r\n";
            break;
          }
          std::lock_guard lock(store_mutex_);
          auto it = store_.find(request.key);
          if (it == store_.end() && store_.size() >= config_.max_items && !store_.empty()) {
            store_.erase(store_.begin());  // bounded store, arbitrary eviction
          }
          store_[request.key] = Item{request.flags, std::move(request.value)};
          reply = "STORED\r\n";
          break;
        }
        default:
          reply = "ERROR\r\n";
          break;
      }
      if (!send_all(fd, reply)) return;
    }
    buffer.erase(0, offset);
  }
}

}  // namespace tailmeter
