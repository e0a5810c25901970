// Copyright 2026 The DeCK Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "deck/core.hpp"
#include "deck/enhancement.hpp"
#include "deck/logit_source.hpp"

#include <random>

namespace deck {

/// Edited and base token sequences, kept in sync: every generated token is
/// appended to both, so the length difference stays the prompt difference.
struct DualContext {
  TokenSeq seq_e;     // edit prompt + generated
  TokenSeq seq_b;     // base prompt + generated
  TokenSeq generated; // shared suffix

  static DualContext from_prompts(TokenSeq prompt_e, TokenSeq prompt_b);
  void append(TokenId token);
};

/// Tokens passing the plausibility filter.
struct HeadSet {
  std::vector<TokenId> members; // ascending
  std::vector<char> mask;       // |V| booleans
  bool contains(TokenId id) const {
    return id >= 0 && static_cast<std::size_t>(id) < mask.size() &&
           mask[static_cast<std::size_t>(id)];
  }
};

struct StepTrace {
  std::size_t step = 0;
  std::size_t head_size = 0;
  TokenId chosen = 0;
  double logit_e = 0.0; // enhanced edited-context logit of the chosen token
  double logit_b = 0.0;
  double prob_e = 0.0; // under P^E_Enh
  double prob_b = 0.0;
  double prob_final = 0.0; // under the post-contrast distribution
  std::size_t rank_e = 0;
  std::size_t rank_b = 0;
};

enum class StopReason { StopToken, MaxTokens };

struct GenerationTrace {
  std::vector<StepTrace> steps;
  TokenSeq tokens; // generated ids, stop token excluded
  std::string text;
  StopReason stop_reason = StopReason::MaxTokens;
};

/// { v : p_enh(v) >= lambda * max p_enh }.
HeadSet apc_head(const ProbVector &p_enh, double lambda);

/// ln p_enh(v) - gamma * ln max(p_base(v), 1e-12) on the head, -inf off it.
/// The floor keeps the score finite when the base assigns (numerically) zero.
LogitVector contrast_scores(const ProbVector &p_enh, const ProbVector &p_base,
                            double gamma, const HeadSet &head);

/// Every distribution the pipeline produces at one position. Exposed so the
/// analytics can rank arbitrary tokens, not just the chosen one.
struct StepDistributions {
  LogitVector enhanced;
  LogitVector base_logits;
  ProbVector p_enh;
  ProbVector p_base;
  HeadSet head;
  ProbVector final_dist;
};

StepDistributions deck_distributions(const TokenSeq &seq_e, const TokenSeq &seq_b,
                                     const LogitSource &source,
                                     const RelevanceVector &relevance,
                                     const DecodeConfig &config);

/// One generation session; precomputes the relevance vector once per edit
/// set and owns the sampling RNG.
class DeckSession {
public:
  DeckSession(const LogitSource &source, const EditTokenSet &edits,
              const EmbeddingProvider &embeddings, DecodeConfig config);

  /// Full DeCK pipeline for one step: enhance, filter, contrast, softmax,
  /// select, append to both sequences.
  std::pair<TokenId, StepTrace> decode_step(DualContext &ctx);

  GenerationTrace generate(TokenSeq prompt_e, TokenSeq prompt_b);

  const RelevanceVector &relevance() const { return relevance_; }

private:
  TokenId select(const ProbVector &final_dist);

  const LogitSource &source_;
  const EmbeddingProvider &embeddings_;
  DecodeConfig config_;
  RelevanceVector relevance_;
  std::mt19937_64 rng_;
  std::size_t step_ = 0;
};

/// Convenience wrapper over a one-shot session.
GenerationTrace generate(const TokenSeq &prompt_e, const TokenSeq &prompt_b,
                         const LogitSource &source, const EditTokenSet &edits,
                         const EmbeddingProvider &embeddings,
                         const DecodeConfig &config);

/// Plain greedy decoding on a single context (no enhancement, no contrast).
GenerationTrace greedy_generate(const TokenSeq &prompt, const LogitSource &source,
                                const DecodeConfig &config);

} // namespace deck
