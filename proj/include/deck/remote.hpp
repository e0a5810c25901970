// Copyright 2026 The DeCK Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "deck/core.hpp"
#include "deck/logit_source.hpp"

#include <atomic>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

// Line-delimited JSON over a TCP stream:
//   handshake: {"op":"hello"} -> {"vocab_size": N}
//   query:     {"op":"logits","tokens":[...]} -> {"logits":[...]} (N floats)
// Any other reply shape is a protocol violation.

namespace deck {

/// LogitSource backed by a remote logit server. The vocabulary size is
/// validated once at handshake; each reply is still length-checked.
class RemoteLogitSource : public LogitSource {
public:
  /// Connects and performs the handshake. Throws "backend unavailable" on
  /// connect/timeout, "vocab mismatch" when sizes disagree.
  RemoteLogitSource(Vocab vocab, const std::string &host, int port,
                    int timeout_ms = 2000);
  ~RemoteLogitSource() override;

  RemoteLogitSource(const RemoteLogitSource &) = delete;
  RemoteLogitSource &operator=(const RemoteLogitSource &) = delete;

  const Vocab &vocab() const override { return vocab_; }
  LogitVector next_logits(const TokenSeq &context) const override;

private:
  std::string roundtrip(const std::string &line) const;

  Vocab vocab_;
  int fd_ = -1;
};

/// Reference server stub: serves a LogitSource over the wire protocol, one
/// thread per client so every evaluation worker can hold its own connection.
/// Fault modes exist to exercise the client's error paths.
class LogitServer {
public:
  enum class Fault { None, WrongLength, MalformedJson, NoReply, WrongVocabSize };

  LogitServer(const LogitSource &source, Fault fault = Fault::None);
  ~LogitServer();

  /// Binds an ephemeral port (or `port` if nonzero) and serves on a
  /// background thread until stop()/destruction.
  int start(int port = 0);
  void stop();
  int port() const { return port_; }

private:
  void serve();
  void handle_client(int client_fd);

  const LogitSource &source_;
  Fault fault_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::thread thread_;
  std::atomic<bool> running_{false};
  std::mutex clients_mutex_;
  std::vector<std::thread> client_threads_;
  std::vector<int> client_fds_;
};

/// Parses "host:port".
std::pair<std::string, int> parse_endpoint(const std::string &addr);

} // namespace deck
