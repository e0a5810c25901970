// Copyright 2026 The DeCK Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace deck {

using TokenId = std::int32_t;
using TokenSeq = std::vector<TokenId>;

/// Token string <-> id bijection. Immutable after construction.
class Vocab {
public:
  explicit Vocab(std::vector<std::string> tokens);

  /// One token per line; line number = id.
  static Vocab load(const std::string &path);

  std::size_t size() const { return tokens_.size(); }
  const std::string &token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::optional<TokenId> id_of(const std::string &token) const;
  const std::vector<std::string> &tokens() const { return tokens_; }

private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

/// Raw scores over the vocabulary. -inf is permitted only as an explicit
/// off-head mask written by contrast_scores.
struct LogitVector {
  std::vector<double> values;
};

/// Normalized scores; entries >= 0, sum within 1e-6 of 1.
struct ProbVector {
  std::vector<double> values;
};

enum class Sampling { Greedy, Temperature };

struct DecodeConfig {
  double gamma = 0.2;       // contrasting coefficient
  double alpha_freq = 1.0;  // scaling inside the frequency weight
  double alpha_enh = 1.0;   // logit coefficient in the enhancement
  double beta = 1.0;        // relevance coefficient in the enhancement
  double lambda = 0.1;      // APC threshold
  double eps_freq = 1e-4;   // log-argument floor in the frequency weight
  double eps_q = 1e-6;      // off-support mass in the target distribution
  double tau = 1.0;         // softmax temperature for model distributions
  std::size_t max_tokens = 64;
  std::set<TokenId> stop_tokens;
  Sampling sampling = Sampling::Greedy;
  std::uint64_t seed = 0;
  bool clamp_freq_weight = true; // ablation switch for the freq-weight floor

  /// Throws std::invalid_argument on any range violation.
  void validate() const;
};

/// Numerically stable softmax; -inf entries map to probability exactly 0.
/// Throws "empty support" when every entry is -inf.
ProbVector softmax(const LogitVector &logits, double tau = 1.0);

/// 1-based rank of `token` under descending sort; ties break toward the
/// lower id.
std::size_t rank_of(std::span<const double> values, TokenId token);

/// Argmax with the same tie rule as rank_of.
TokenId argmax(std::span<const double> values);

void check_token_seq(const TokenSeq &seq, std::size_t vocab_size);

} // namespace deck
