// Copyright 2026 The DeCK Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "deck/analytics.hpp"
#include "deck/contrast.hpp"
#include "deck/harness.hpp"

#include <functional>
#include <memory>

namespace deck {

enum class EvalMode { Base, Ice, Deck };

/// Per-worker source handle. Built-in models are immutable and shared; the
/// remote adapter opens one connection per worker.
using SourceFactory = std::function<std::shared_ptr<const LogitSource>()>;

struct QuestionOutcome {
  std::string question;
  std::string generated;
  bool match = false;
  std::size_t steps = 0;
  double new_token_prob = 0.0;  // step-0 decoding prob of the answer's first token
  std::size_t new_token_rank = 0;
  double new_token_logit = 0.0;
};

struct CaseOutcome {
  std::string id;
  bool error = false;
  std::string error_message;
  bool matched = false; // all questions matched
  std::vector<QuestionOutcome> questions;
};

struct RunReport {
  std::string mode;
  std::string memory_mode;
  DecodeConfig config;
  std::vector<CaseOutcome> cases;
  double accuracy = 0.0;
  std::vector<RankRecord> rank_records; // post-edit new-knowledge, per fact
  std::vector<double> new_token_probs;  // one per question, feeds histograms
};

struct EvalOptions {
  EvalMode mode = EvalMode::Deck;
  MemoryMode memory_mode = MemoryMode::Single;
  std::size_t workers = 1;
  std::size_t retrieve_k = 4;
  PromptTemplate prompt_template;
  bool edits_new_object_only = false; // restrict the edit token set
};

RunReport evaluate(const std::vector<EditCase> &dataset,
                   const SourceFactory &make_source,
                   const EmbeddingProvider &embeddings,
                   const DecodeConfig &config, const EvalOptions &options);

/// Convenience overload for thread-safe in-process sources.
RunReport evaluate(const std::vector<EditCase> &dataset,
                   const LogitSource &source, const EmbeddingProvider &embeddings,
                   const DecodeConfig &config, const EvalOptions &options);

/// Repeats each fact with `attempts` question paraphrases (cycled) and
/// classifies the failure fractions.
std::vector<StubbornnessReport>
stubborn_run(const std::vector<EditCase> &dataset, const LogitSource &source,
             const EmbeddingProvider &embeddings, const DecodeConfig &config,
             const EvalOptions &options, std::size_t attempts);

/// Fig. 2-style pre/post records for every case, against the raw source.
std::vector<RankRecord> shift_stats(const std::vector<EditCase> &dataset,
                                    const LogitSource &source,
                                    const EvalOptions &options);

// Report serialization.
std::string report_to_json(const RunReport &report);
void write_report(const RunReport &report, const std::string &path);
RunReport report_from_json_file(const std::string &path);

void write_rank_records_csv(const std::vector<RankRecord> &records,
                            const std::string &path);
void write_stubbornness_csv(const std::vector<StubbornnessReport> &reports,
                            const std::string &path);
void write_histogram_csv(const Histogram &hist, const std::string &path);
void write_rank_table_csv(const std::vector<RankBucketRow> &rows,
                          const std::string &path);

} // namespace deck
