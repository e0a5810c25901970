// Copyright 2026 The DeCK Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "deck/core.hpp"

#include <map>
#include <memory>

namespace deck {

/// Produces next-token logits for a context. Implementations are
/// deterministic: identical context, identical logits.
class LogitSource {
public:
  virtual ~LogitSource() = default;
  virtual const Vocab &vocab() const = 0;
  virtual LogitVector next_logits(const TokenSeq &context) const = 0;
};

/// Fixture model: first rule whose pattern is a suffix of the context wins,
/// otherwise the default logits. Suffix matching lets one fixture drive both
/// the edited and base sequences, which share generated suffixes.
class TableModel : public LogitSource {
public:
  struct Rule {
    TokenSeq suffix;
    LogitVector logits;
  };

  TableModel(Vocab vocab, std::vector<Rule> rules, LogitVector default_logits);

  /// JSON fixture: {"default": [floats], "rules": [{"suffix": [ints],
  /// "logits": [floats]}]}.
  static TableModel load(const Vocab &vocab, const std::string &path);

  const Vocab &vocab() const override { return vocab_; }
  LogitVector next_logits(const TokenSeq &context) const override;

private:
  Vocab vocab_;
  std::vector<Rule> rules_;
  LogitVector default_logits_;
};

/// Add-k smoothed n-gram model; logits are log conditional probabilities.
class NGramModel : public LogitSource {
public:
  NGramModel(Vocab vocab, std::size_t order, double smoothing_k);

  const Vocab &vocab() const override { return vocab_; }
  LogitVector next_logits(const TokenSeq &context) const override;

  std::size_t order() const { return order_; }
  const std::map<TokenSeq, std::map<TokenId, std::size_t>> &counts() const {
    return counts_;
  }

  friend NGramModel train_ngram(Vocab vocab,
                                const std::vector<TokenSeq> &corpus,
                                std::size_t order, double smoothing_k);

private:
  Vocab vocab_;
  std::size_t order_;
  double smoothing_k_;
  std::map<TokenSeq, std::map<TokenId, std::size_t>> counts_;
};

/// Counts every sliding window of length `order` across the corpus.
/// Throws "insufficient data" when no sequence is long enough.
NGramModel train_ngram(Vocab vocab, const std::vector<TokenSeq> &corpus,
                       std::size_t order, double smoothing_k = 0.5);

/// Token embedding lookup used by the relevance scoring.
class EmbeddingProvider {
public:
  virtual ~EmbeddingProvider() = default;
  virtual std::size_t dim() const = 0;
  virtual std::vector<double> embed(TokenId id) const = 0;
};

/// embed(i) is the i-th standard basis vector; cosine degenerates to exact
/// token match.
class OneHotEmbeddings : public EmbeddingProvider {
public:
  explicit OneHotEmbeddings(std::size_t vocab_size) : n_(vocab_size) {}
  std::size_t dim() const override { return n_; }
  std::vector<double> embed(TokenId id) const override;

private:
  std::size_t n_;
};

/// Dense table loaded from JSON: {"dim": d, "vectors": [[d floats] x |V|]}.
class TableEmbeddings : public EmbeddingProvider {
public:
  TableEmbeddings(std::size_t dim, std::vector<std::vector<double>> vectors);
  static TableEmbeddings load(const std::string &path);

  std::size_t dim() const override { return dim_; }
  std::vector<double> embed(TokenId id) const override;

private:
  std::size_t dim_;
  std::vector<std::vector<double>> vectors_;
};

} // namespace deck
