// Copyright 2026 The DeCK Authors
// SPDX-License-Identifier: Apache-2.0

// Reference logit server: serves a table or n-gram model over the
// line-delimited JSON protocol so the CLI's remote adapter has a peer.

#include "deck/harness.hpp"
#include "deck/remote.hpp"

#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

namespace {

volatile std::sig_atomic_t g_stop = 0;

void handle_signal(int) { g_stop = 1; }

deck::NGramModel load_ngram(const deck::Vocab &vocab, const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open ngram model: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  std::size_t order = j.at("order").get<std::size_t>();
  double k = j.value("smoothing_k", 0.5);
  std::vector<deck::TokenSeq> corpus;
  for (const auto &line : j.at("corpus"))
    corpus.push_back(deck::tokenize(line.get<std::string>(), vocab));
  return deck::train_ngram(vocab, corpus, order, k);
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"serve a logit model over line-delimited JSON"};
  std::string vocab_path, model_spec;
  int port = 0;
  app.add_option("--vocab", vocab_path, "vocabulary file, one token per line")
      ->required();
  app.add_option("--model", model_spec, "model spec: table:PATH | ngram:PATH")
      ->required();
  app.add_option("--port", port, "listen port (0 picks an ephemeral one)")
      ->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    deck::Vocab vocab = deck::Vocab::load(vocab_path);
    auto split = model_spec.find(':');
    if (split == std::string::npos)
      throw std::runtime_error("model spec must be table:PATH or ngram:PATH");
    std::string kind = model_spec.substr(0, split);
    std::string arg = model_spec.substr(split + 1);

    std::unique_ptr<deck::LogitSource> model;
    if (kind == "table")
      model = std::make_unique<deck::TableModel>(
          deck::TableModel::load(vocab, arg));
    else if (kind == "ngram")
      model = std::make_unique<deck::NGramModel>(load_ngram(vocab, arg));
    else
      throw std::runtime_error("unknown model kind: " + kind);

    deck::LogitServer server(*model);
    int bound = server.start(port);
    std::printf("serving %s on port %d (vocab %zu)\n", model_spec.c_str(),
                bound, vocab.size());
    std::fflush(stdout);

    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    while (!g_stop)
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
    return 0;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
