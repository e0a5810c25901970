// Copyright 2026 The DeCK Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "deck/core.hpp"
#include "deck/logit_source.hpp"

#include <map>
#include <string>

namespace deck {

enum class KnowledgeKind { New, Parametric };
enum class EditPhase { PreEdit, PostEdit };

/// First-token logit/rank of a knowledge answer under one prompt.
struct RankRecord {
  std::string fact_id;
  KnowledgeKind kind = KnowledgeKind::New;
  EditPhase phase = EditPhase::PreEdit;
  TokenId first_token = 0;
  double logit = 0.0;
  double prob = 0.0; // softmax probability recorded alongside the raw logit
  std::size_t rank = 1;
};

enum class StubbornBucket { None, Gt33, Gt67 };

struct StubbornnessReport {
  std::string fact_id;
  std::size_t attempts = 0;
  std::size_t failures = 0;
  double failure_fraction = 0.0;
  StubbornBucket bucket = StubbornBucket::None;
};

struct Histogram {
  std::vector<double> edges;       // ascending, size bins+1
  std::vector<std::size_t> counts; // size bins
};

/// Logit and 1-based rank of the answer's first token in next_logits(prompt).
std::pair<double, std::size_t> first_token_stats(const LogitSource &source,
                                                 const TokenSeq &prompt,
                                                 TokenId answer_first_token);

/// Pre/post-edit records for the new and parametric answers: the base prompt
/// supplies the pre-edit distribution, the edited prompt the post-edit one.
std::vector<RankRecord> knowledge_shift(const LogitSource &source,
                                        const std::string &fact_id,
                                        const TokenSeq &base_prompt,
                                        const TokenSeq &edited_prompt,
                                        TokenId new_first_token,
                                        TokenId parametric_first_token);

struct RankBucket {
  std::size_t lo = 0;
  std::size_t hi = 0; // inclusive
};

/// Table 3-style column ranges: 2, 3-5, 6-10, 11-20, 21-50, 51-100.
std::vector<RankBucket> default_rank_buckets();

struct RankBucketRow {
  RankBucket bucket;
  std::size_t count = 0;
  double mean_baseline_rank = 0.0;
  double mean_contrast_rank = 0.0;
  double mean_improvement = 0.0; // baseline - contrast
};

/// Pairs records by fact id; facts are bucketed by their baseline rank.
/// Throws on fact ids present in only one of the two lists.
std::vector<RankBucketRow>
rank_improvement(const std::vector<RankRecord> &records_baseline,
                 const std::vector<RankRecord> &records_contrast,
                 const std::vector<RankBucket> &buckets = default_rank_buckets());

/// Failure fraction and strict >1/3, >2/3 bucket per fact.
std::vector<StubbornnessReport>
classify_stubborn(const std::map<std::string, std::vector<bool>> &outcomes);

/// Equal-width bins over [0,1]; the last bin is right-inclusive.
Histogram probability_histogram(const std::vector<double> &probs,
                                std::size_t num_bins);

std::string to_string(KnowledgeKind k);
std::string to_string(EditPhase p);
std::string to_string(StubbornBucket b);

} // namespace deck
