// Copyright 2026 The DeCK Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "deck/core.hpp"
#include "deck/logit_source.hpp"

namespace deck {

/// Multiset of token ids obtained by tokenizing an edit descriptor.
struct EditTokenSet {
  std::unordered_map<TokenId, std::size_t> freq;
  std::vector<TokenId> support; // distinct ids, ascending
  std::size_t support_size() const { return support.size(); }

  static EditTokenSet from_tokens(const TokenSeq &tokens);
};

/// Per-vocabulary-token relevance to an edit descriptor.
struct RelevanceVector {
  std::vector<double> scores;
};

/// max(0, ln(freq + eps_freq)) * alpha_freq. The clamp keeps tokens absent
/// from the edit set at exactly 0 instead of a large negative weight; pass
/// clamp=false for the unclamped ablation.
double freq_weight(std::size_t freq, double eps_freq, double alpha_freq,
                   bool clamp = true);

/// scores(v) = max over edit-support tokens e of cosine(embed(v), embed(e)),
/// times freq_weight(v). Cosine with a zero vector is 0.
RelevanceVector relevance_scores(const Vocab &vocab, const EditTokenSet &edits,
                                 const EmbeddingProvider &embeddings,
                                 double eps_freq, double alpha_freq,
                                 bool clamp = true);

/// alpha_enh * logits + beta * scores, elementwise.
LogitVector enhance_logits(const LogitVector &logits, const RelevanceVector &s,
                           double alpha_enh, double beta);

/// Raw mass 1/m on edit-support tokens, eps_q elsewhere, renormalized.
ProbVector target_distribution(const EditTokenSet &edits, const Vocab &vocab,
                               double eps_q);

/// Relevance-weighted symmetric divergence between p and q against the
/// midpoint M = (p+q)/2. Weights are clamped to >= 0 and renormalized to sum
/// to 1 (uniform if all zero). Result lies in [0, ln 2].
double ked(const ProbVector &p, const ProbVector &q,
           const RelevanceVector &weights);

} // namespace deck
