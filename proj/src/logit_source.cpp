// Copyright 2026 The DeCK Authors
// SPDX-License-Identifier: Apache-2.0

#include "deck/logit_source.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace deck {

static void check_context(const TokenSeq &context, std::size_t vocab_size) {
  if (context.empty()) throw std::invalid_argument("empty context");
  check_token_seq(context, vocab_size);
}

TableModel::TableModel(Vocab vocab, std::vector<Rule> rules,
                       LogitVector default_logits)
    : vocab_(std::move(vocab)), rules_(std::move(rules)),
      default_logits_(std::move(default_logits)) {
  if (default_logits_.values.size() != vocab_.size())
    throw std::invalid_argument("default logits length != vocab size");
  for (const auto &r : rules_) {
    if (r.logits.values.size() != vocab_.size())
      throw std::invalid_argument("rule logits length != vocab size");
    check_token_seq(r.suffix, vocab_.size());
  }
}

TableModel TableModel::load(const Vocab &vocab, const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open table model file: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  LogitVector def{j.at("default").get<std::vector<double>>()};
  std::vector<Rule> rules;
  for (const auto &r : j.at("rules")) {
    rules.push_back({r.at("suffix").get<TokenSeq>(),
                     LogitVector{r.at("logits").get<std::vector<double>>()}});
  }
  return TableModel(Vocab(vocab.tokens()), std::move(rules), std::move(def));
}

static bool is_suffix(const TokenSeq &pattern, const TokenSeq &seq) {
  if (pattern.size() > seq.size()) return false;
  return std::equal(pattern.rbegin(), pattern.rend(), seq.rbegin());
}

LogitVector TableModel::next_logits(const TokenSeq &context) const {
  check_context(context, vocab_.size());
  for (const auto &r : rules_)
    if (is_suffix(r.suffix, context)) return r.logits;
  return default_logits_;
}

NGramModel::NGramModel(Vocab vocab, std::size_t order, double smoothing_k)
    : vocab_(std::move(vocab)), order_(order), smoothing_k_(smoothing_k) {
  if (order_ < 1) throw std::invalid_argument("order must be >= 1");
  if (!(smoothing_k_ > 0)) throw std::invalid_argument("smoothing_k must be > 0");
}

LogitVector NGramModel::next_logits(const TokenSeq &context) const {
  check_context(context, vocab_.size());
  TokenSeq key;
  if (order_ > 1) {
    std::size_t n = std::min(context.size(), order_ - 1);
    key.assign(context.end() - static_cast<std::ptrdiff_t>(n), context.end());
  }
  const std::map<TokenId, std::size_t> *table = nullptr;
  if (auto it = counts_.find(key); it != counts_.end()) table = &it->second;

  std::size_t total = 0;
  if (table)
    for (const auto &[tok, c] : *table) total += c;

  LogitVector out;
  out.values.resize(vocab_.size());
  const double denom =
      static_cast<double>(total) + smoothing_k_ * static_cast<double>(vocab_.size());
  for (std::size_t v = 0; v < vocab_.size(); ++v) {
    std::size_t c = 0;
    if (table) {
      if (auto it = table->find(static_cast<TokenId>(v)); it != table->end())
        c = it->second;
    }
    out.values[v] = std::log((static_cast<double>(c) + smoothing_k_) / denom);
  }
  return out;
}

NGramModel train_ngram(Vocab vocab, const std::vector<TokenSeq> &corpus,
                       std::size_t order, double smoothing_k) {
  if (corpus.empty()) throw std::invalid_argument("insufficient data: empty corpus");
  NGramModel model(std::move(vocab), order, smoothing_k);
  bool any_window = false;
  for (const auto &seq : corpus) {
    check_token_seq(seq, model.vocab_.size());
    if (seq.size() < order) continue;
    for (std::size_t i = 0; i + order <= seq.size(); ++i) {
      TokenSeq key(seq.begin() + static_cast<std::ptrdiff_t>(i),
                   seq.begin() + static_cast<std::ptrdiff_t>(i + order - 1));
      model.counts_[key][seq[i + order - 1]] += 1;
      any_window = true;
    }
  }
  if (!any_window)
    throw std::invalid_argument("insufficient data: no sequence of length >= order");
  return model;
}

std::vector<double> OneHotEmbeddings::embed(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= n_)
    throw std::out_of_range("unknown token: id " + std::to_string(id));
  std::vector<double> v(n_, 0.0);
  v[static_cast<std::size_t>(id)] = 1.0;
  return v;
}

TableEmbeddings::TableEmbeddings(std::size_t dim,
                                 std::vector<std::vector<double>> vectors)
    : dim_(dim), vectors_(std::move(vectors)) {
  for (const auto &v : vectors_)
    if (v.size() != dim_)
      throw std::invalid_argument("embedding dimension mismatch");
}

TableEmbeddings TableEmbeddings::load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open embedding file: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  return TableEmbeddings(j.at("dim").get<std::size_t>(),
                         j.at("vectors").get<std::vector<std::vector<double>>>());
}

std::vector<double> TableEmbeddings::embed(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= vectors_.size())
    throw std::out_of_range("unknown token: id " + std::to_string(id));
  return vectors_[static_cast<std::size_t>(id)];
}

} // namespace deck
