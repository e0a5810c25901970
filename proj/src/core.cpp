// Copyright 2026 The DeCK Authors
// SPDX-License-Identifier: Apache-2.0

#include "deck/core.hpp"
#include "deck/simd.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace deck {

Vocab::Vocab(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    auto [it, inserted] = index_.emplace(tokens_[i], static_cast<TokenId>(i));
    if (!inserted)
      throw std::invalid_argument("duplicate token in vocabulary: " + tokens_[i]);
  }
}

Vocab Vocab::load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocabulary file: " + path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return Vocab(std::move(tokens));
}

std::optional<TokenId> Vocab::id_of(const std::string &token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void DecodeConfig::validate() const {
  if (!(gamma >= 0)) throw std::invalid_argument("gamma must be >= 0");
  if (!(alpha_freq > 0)) throw std::invalid_argument("alpha_freq must be > 0");
  if (!(alpha_enh > 0)) throw std::invalid_argument("alpha_enh must be > 0");
  if (!(beta >= 0)) throw std::invalid_argument("beta must be >= 0");
  if (!(lambda > 0 && lambda <= 1))
    throw std::invalid_argument("lambda must be in (0, 1]");
  if (!(eps_freq > 0)) throw std::invalid_argument("eps_freq must be > 0");
  if (!(eps_q > 0)) throw std::invalid_argument("eps_q must be > 0");
  if (!(tau > 0)) throw std::invalid_argument("tau must be > 0");
}

ProbVector softmax(const LogitVector &logits, double tau) {
  if (!(tau > 0)) throw std::invalid_argument("tau must be > 0");
  const auto &v = logits.values;
  double m = simd::reduce_max(v);
  if (!std::isfinite(m)) throw std::runtime_error("empty support");

  ProbVector out;
  out.values.resize(v.size());
  if (tau == 1.0) {
    double sum = simd::exp_shifted(v, m, out.values);
    simd::scale(out.values, 1.0 / sum, out.values);
    return out;
  }
  std::vector<double> scaled(v.size());
  simd::scale(v, 1.0 / tau, scaled);
  // -inf / tau stays -inf; rescan the max after scaling.
  double ms = simd::reduce_max(scaled);
  double sum = simd::exp_shifted(scaled, ms, out.values);
  simd::scale(out.values, 1.0 / sum, out.values);
  return out;
}

std::size_t rank_of(std::span<const double> values, TokenId token) {
  if (token < 0 || static_cast<std::size_t>(token) >= values.size())
    throw std::out_of_range("token id out of range");
  const double v = values[static_cast<std::size_t>(token)];
  std::size_t rank = 1;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > v) ++rank;
    else if (values[i] == v && static_cast<TokenId>(i) < token) ++rank;
  }
  return rank;
}

TokenId argmax(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return static_cast<TokenId>(best);
}

void check_token_seq(const TokenSeq &seq, std::size_t vocab_size) {
  for (TokenId id : seq)
    if (id < 0 || static_cast<std::size_t>(id) >= vocab_size)
      throw std::out_of_range("unknown token: id " + std::to_string(id));
}

} // namespace deck
