// Copyright 2026 The DeCK Authors
// SPDX-License-Identifier: Apache-2.0

#include "deck/analytics.hpp"

#include <cmath>
#include <stdexcept>

namespace deck {

std::pair<double, std::size_t> first_token_stats(const LogitSource &source,
                                                 const TokenSeq &prompt,
                                                 TokenId answer_first_token) {
  LogitVector logits = source.next_logits(prompt);
  if (answer_first_token < 0 ||
      static_cast<std::size_t>(answer_first_token) >= logits.values.size())
    throw std::out_of_range("unknown token: id " + std::to_string(answer_first_token));
  return {logits.values[static_cast<std::size_t>(answer_first_token)],
          rank_of(logits.values, answer_first_token)};
}

static RankRecord make_record(const LogitSource &source, const std::string &fact_id,
                              const TokenSeq &prompt, TokenId token,
                              KnowledgeKind kind, EditPhase phase) {
  LogitVector logits = source.next_logits(prompt);
  ProbVector probs = softmax(logits);
  RankRecord rec;
  rec.fact_id = fact_id;
  rec.kind = kind;
  rec.phase = phase;
  rec.first_token = token;
  rec.logit = logits.values[static_cast<std::size_t>(token)];
  rec.prob = probs.values[static_cast<std::size_t>(token)];
  rec.rank = rank_of(logits.values, token);
  return rec;
}

std::vector<RankRecord> knowledge_shift(const LogitSource &source,
                                        const std::string &fact_id,
                                        const TokenSeq &base_prompt,
                                        const TokenSeq &edited_prompt,
                                        TokenId new_first_token,
                                        TokenId parametric_first_token) {
  std::vector<RankRecord> records;
  records.push_back(make_record(source, fact_id, base_prompt, new_first_token,
                                KnowledgeKind::New, EditPhase::PreEdit));
  records.push_back(make_record(source, fact_id, base_prompt, parametric_first_token,
                                KnowledgeKind::Parametric, EditPhase::PreEdit));
  records.push_back(make_record(source, fact_id, edited_prompt, new_first_token,
                                KnowledgeKind::New, EditPhase::PostEdit));
  records.push_back(make_record(source, fact_id, edited_prompt, parametric_first_token,
                                KnowledgeKind::Parametric, EditPhase::PostEdit));
  return records;
}

std::vector<RankBucket> default_rank_buckets() {
  return {{2, 2}, {3, 5}, {6, 10}, {11, 20}, {21, 50}, {51, 100}};
}

std::vector<RankBucketRow>
rank_improvement(const std::vector<RankRecord> &records_baseline,
                 const std::vector<RankRecord> &records_contrast,
                 const std::vector<RankBucket> &buckets) {
  std::map<std::string, std::size_t> contrast_rank;
  for (const auto &r : records_contrast) contrast_rank[r.fact_id] = r.rank;
  if (contrast_rank.size() != records_contrast.size())
    throw std::invalid_argument("duplicate fact id in contrast records");

  std::vector<RankBucketRow> rows(buckets.size());
  for (std::size_t b = 0; b < buckets.size(); ++b) rows[b].bucket = buckets[b];

  std::size_t matched = 0;
  for (const auto &r : records_baseline) {
    auto it = contrast_rank.find(r.fact_id);
    if (it == contrast_rank.end())
      throw std::invalid_argument("unmatched fact id: " + r.fact_id);
    ++matched;
    for (auto &row : rows) {
      if (r.rank >= row.bucket.lo && r.rank <= row.bucket.hi) {
        row.count += 1;
        row.mean_baseline_rank += static_cast<double>(r.rank);
        row.mean_contrast_rank += static_cast<double>(it->second);
        break;
      }
    }
  }
  if (matched != contrast_rank.size())
    throw std::invalid_argument("unmatched fact id in contrast records");

  for (auto &row : rows) {
    if (row.count) {
      row.mean_baseline_rank /= static_cast<double>(row.count);
      row.mean_contrast_rank /= static_cast<double>(row.count);
      row.mean_improvement = row.mean_baseline_rank - row.mean_contrast_rank;
    }
  }
  return rows;
}

std::vector<StubbornnessReport>
classify_stubborn(const std::map<std::string, std::vector<bool>> &outcomes) {
  std::vector<StubbornnessReport> reports;
  for (const auto &[fact_id, successes] : outcomes) {
    if (successes.empty())
      throw std::invalid_argument("no attempts for fact: " + fact_id);
    StubbornnessReport rep;
    rep.fact_id = fact_id;
    rep.attempts = successes.size();
    for (bool ok : successes)
      if (!ok) rep.failures += 1;
    rep.failure_fraction =
        static_cast<double>(rep.failures) / static_cast<double>(rep.attempts);
    if (rep.failure_fraction > 2.0 / 3.0) rep.bucket = StubbornBucket::Gt67;
    else if (rep.failure_fraction > 1.0 / 3.0) rep.bucket = StubbornBucket::Gt33;
    else rep.bucket = StubbornBucket::None;
    reports.push_back(std::move(rep));
  }
  return reports;
}

Histogram probability_histogram(const std::vector<double> &probs,
                                std::size_t num_bins) {
  if (num_bins < 1) throw std::invalid_argument("num_bins must be >= 1");
  Histogram h;
  h.edges.resize(num_bins + 1);
  for (std::size_t i = 0; i <= num_bins; ++i)
    h.edges[i] = static_cast<double>(i) / static_cast<double>(num_bins);
  h.counts.assign(num_bins, 0);
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("probability out of [0,1]: " + std::to_string(p));
    auto bin = static_cast<std::size_t>(p * static_cast<double>(num_bins));
    if (bin >= num_bins) bin = num_bins - 1; // p == 1 falls in the last bin
    h.counts[bin] += 1;
  }
  return h;
}

std::string to_string(KnowledgeKind k) {
  return k == KnowledgeKind::New ? "new" : "parametric";
}
std::string to_string(EditPhase p) {
  return p == EditPhase::PreEdit ? "pre-edit" : "post-edit";
}
std::string to_string(StubbornBucket b) {
  switch (b) {
  case StubbornBucket::Gt67: return "gt67";
  case StubbornBucket::Gt33: return "gt33";
  default: return "none";
  }
}

} // namespace deck
