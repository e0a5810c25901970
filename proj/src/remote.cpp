// Copyright 2026 The DeCK Authors
// SPDX-License-Identifier: Apache-2.0

#include "deck/remote.hpp"

#include <arpa/inet.h>
#include <cerrno>
#include <cstring>
#include <netdb.h>
#include <netinet/in.h>
#include <stdexcept>
#include <sys/socket.h>
#include <unistd.h>

#include <json.hpp>

namespace deck {

using nlohmann::json;

static void close_fd(int &fd) {
  if (fd >= 0) {
    ::close(fd);
    fd = -1;
  }
}

static void send_line(int fd, const std::string &line) {
  std::string msg = line + "\n";
  std::size_t off = 0;
  while (off < msg.size()) {
    ssize_t n = ::send(fd, msg.data() + off, msg.size() - off, MSG_NOSIGNAL);
    if (n <= 0) throw std::runtime_error("backend unavailable: send failed");
    off += static_cast<std::size_t>(n);
  }
}

static std::string recv_line(int fd) {
  std::string line;
  char c;
  for (;;) {
    ssize_t n = ::recv(fd, &c, 1, 0);
    if (n == 0) throw std::runtime_error("backend unavailable: connection closed");
    if (n < 0) {
      if (errno == EAGAIN || errno == EWOULDBLOCK)
        throw std::runtime_error("backend unavailable: timeout");
      throw std::runtime_error("backend unavailable: recv failed");
    }
    if (c == '\n') return line;
    line += c;
  }
}

RemoteLogitSource::RemoteLogitSource(Vocab vocab, const std::string &host,
                                     int port, int timeout_ms)
    : vocab_(std::move(vocab)) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw std::runtime_error("backend unavailable: socket failed");

  timeval tv{};
  tv.tv_sec = timeout_ms / 1000;
  tv.tv_usec = (timeout_ms % 1000) * 1000;
  ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  ::setsockopt(fd_, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    hostent *he = ::gethostbyname(host.c_str());
    if (!he) {
      close_fd(fd_);
      throw std::runtime_error("backend unavailable: cannot resolve " + host);
    }
    std::memcpy(&addr.sin_addr, he->h_addr, sizeof(addr.sin_addr));
  }
  if (::connect(fd_, reinterpret_cast<sockaddr *>(&addr), sizeof(addr)) != 0) {
    close_fd(fd_);
    throw std::runtime_error("backend unavailable: connect failed");
  }

  try {
    std::string reply = roundtrip(R"({"op":"hello"})");
    json j = json::parse(reply, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("vocab_size") ||
        !j["vocab_size"].is_number_integer())
      throw std::runtime_error("protocol violation: bad handshake reply");
    if (j["vocab_size"].get<std::size_t>() != vocab_.size())
      throw std::runtime_error("vocab mismatch");
  } catch (...) {
    close_fd(fd_);
    throw;
  }
}

RemoteLogitSource::~RemoteLogitSource() { close_fd(fd_); }

std::string RemoteLogitSource::roundtrip(const std::string &line) const {
  send_line(fd_, line);
  return recv_line(fd_);
}

LogitVector RemoteLogitSource::next_logits(const TokenSeq &context) const {
  if (context.empty()) throw std::invalid_argument("empty context");
  check_token_seq(context, vocab_.size());
  json req = {{"op", "logits"}, {"tokens", context}};
  std::string reply = roundtrip(req.dump());
  json j = json::parse(reply, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("logits") ||
      !j["logits"].is_array())
    throw std::runtime_error("protocol violation: bad reply shape");
  LogitVector out;
  out.values.reserve(j["logits"].size());
  for (const auto &x : j["logits"]) {
    if (!x.is_number())
      throw std::runtime_error("protocol violation: non-numeric logit");
    out.values.push_back(x.get<double>());
  }
  if (out.values.size() != vocab_.size())
    throw std::runtime_error("vocab mismatch");
  return out;
}

LogitServer::LogitServer(const LogitSource &source, Fault fault)
    : source_(source), fault_(fault) {}

LogitServer::~LogitServer() { stop(); }

int LogitServer::start(int port) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw std::runtime_error("server: socket failed");
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::bind(listen_fd_, reinterpret_cast<sockaddr *>(&addr), sizeof(addr)) != 0)
    throw std::runtime_error("server: bind failed");
  if (::listen(listen_fd_, 8) != 0)
    throw std::runtime_error("server: listen failed");
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr *>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  running_ = true;
  thread_ = std::thread([this] { serve(); });
  return port_;
}

void LogitServer::stop() {
  if (!running_.exchange(false)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  close_fd(listen_fd_);
  if (thread_.joinable()) thread_.join();
  std::lock_guard<std::mutex> lock(clients_mutex_);
  for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
  for (auto &t : client_threads_)
    if (t.joinable()) t.join();
  for (int fd : client_fds_) ::close(fd);
  client_threads_.clear();
  client_fds_.clear();
}

void LogitServer::serve() {
  while (running_) {
    int client = ::accept(listen_fd_, nullptr, nullptr);
    if (client < 0) break;
    // One thread per client; fds are closed centrally in stop() so a late
    // shutdown never races a reused descriptor.
    std::lock_guard<std::mutex> lock(clients_mutex_);
    client_fds_.push_back(client);
    client_threads_.emplace_back([this, client] {
      try {
        handle_client(client);
      } catch (...) {
        // client errors end that connection only
      }
    });
  }
}

void LogitServer::handle_client(int client_fd) {
  for (;;) {
    std::string line;
    try {
      line = recv_line(client_fd);
    } catch (...) {
      return;
    }
    json req = json::parse(line, nullptr, false);
    if (req.is_discarded() || !req.is_object() || !req.contains("op")) {
      send_line(client_fd, R"({"error":"bad request"})");
      continue;
    }
    const std::string op = req["op"].get<std::string>();
    if (op == "hello") {
      std::size_t n = source_.vocab().size();
      if (fault_ == Fault::WrongVocabSize) n += 1;
      send_line(client_fd, json{{"vocab_size", n}}.dump());
    } else if (op == "logits") {
      if (fault_ == Fault::NoReply) continue; // starve the client
      if (fault_ == Fault::MalformedJson) {
        send_line(client_fd, "{not json");
        continue;
      }
      LogitVector logits = source_.next_logits(req.at("tokens").get<TokenSeq>());
      if (fault_ == Fault::WrongLength) logits.values.pop_back();
      send_line(client_fd, json{{"logits", logits.values}}.dump());
    } else {
      send_line(client_fd, R"({"error":"unknown op"})");
    }
  }
}

std::pair<std::string, int> parse_endpoint(const std::string &addr) {
  auto pos = addr.rfind(':');
  if (pos == std::string::npos || pos + 1 >= addr.size())
    throw std::invalid_argument("endpoint must be host:port, got " + addr);
  return {addr.substr(0, pos), std::stoi(addr.substr(pos + 1))};
}

} // namespace deck
