// Copyright 2026 The DeCK Authors
// SPDX-License-Identifier: Apache-2.0

#include "deck/evaluate.hpp"

#include <fstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace deck {

using nlohmann::json;

static DecodeConfig effective_config(const DecodeConfig &config, EvalMode mode) {
  DecodeConfig c = config;
  if (mode == EvalMode::Ice) {
    // ICE is the degenerate DeCK configuration, not a separate code path.
    c.gamma = 0.0;
    c.beta = 0.0;
    c.alpha_enh = 1.0;
  }
  return c;
}

static std::string edit_text(const std::vector<EditDescriptor> &edits,
                             bool new_object_only) {
  std::string text;
  for (const auto &e : edits) {
    if (!new_object_only) {
      text += e.subject + " " + e.relation + " ";
    }
    text += e.new_object + " ";
  }
  return text;
}

static QuestionOutcome run_question(const EditCase &edit_case,
                                    const std::string &question,
                                    const EditMemory &memory,
                                    const LogitSource &source,
                                    const EmbeddingProvider &embeddings,
                                    const DecodeConfig &config,
                                    const EvalOptions &options) {
  const Vocab &vocab = source.vocab();
  QuestionOutcome out;
  out.question = question;

  auto edits =
      retrieve_edits(memory, edit_case, question, options.retrieve_k);
  std::string ice_prompt =
      build_ice_prompt(edit_case, question, edits, options.prompt_template);
  std::string base_prompt =
      build_base_prompt(question, options.prompt_template);

  TokenSeq ice_tokens = tokenize(ice_prompt, vocab);
  TokenSeq base_tokens = tokenize(base_prompt, vocab);
  TokenSeq answer_tokens = tokenize(edit_case.expected_answer, vocab);
  if (answer_tokens.empty())
    throw std::runtime_error("answer tokenizes to empty: " +
                             edit_case.expected_answer);
  const TokenId answer_first = answer_tokens.front();

  if (options.mode == EvalMode::Base) {
    GenerationTrace trace = greedy_generate(base_tokens, source, config);
    LogitVector logits = source.next_logits(base_tokens);
    ProbVector probs = softmax(logits, config.tau);
    out.generated = trace.text;
    out.steps = trace.steps.size();
    out.new_token_prob = probs.values[static_cast<std::size_t>(answer_first)];
    out.new_token_rank = rank_of(probs.values, answer_first);
    out.new_token_logit = logits.values[static_cast<std::size_t>(answer_first)];
  } else {
    DecodeConfig eff = effective_config(config, options.mode);
    EditTokenSet edit_set = EditTokenSet::from_tokens(
        tokenize(edit_text(edits, options.edits_new_object_only), vocab));
    DeckSession session(source, edit_set, embeddings, eff);
    StepDistributions d = deck_distributions(ice_tokens, base_tokens, source,
                                             session.relevance(), eff);
    out.new_token_prob =
        d.final_dist.values[static_cast<std::size_t>(answer_first)];
    out.new_token_rank = rank_of(d.final_dist.values, answer_first);
    out.new_token_logit =
        d.enhanced.values[static_cast<std::size_t>(answer_first)];
    GenerationTrace trace = session.generate(ice_tokens, base_tokens);
    out.generated = trace.text;
    out.steps = trace.steps.size();
  }
  out.match = answer_match(out.generated, edit_case.expected_answer);
  return out;
}

static CaseOutcome run_case(const EditCase &edit_case, const EditMemory &memory,
                            const LogitSource &source,
                            const EmbeddingProvider &embeddings,
                            const DecodeConfig &config,
                            const EvalOptions &options) {
  CaseOutcome out;
  out.id = edit_case.id;
  try {
    out.matched = true;
    for (const auto &question : edit_case.questions) {
      out.questions.push_back(run_question(edit_case, question, memory, source,
                                           embeddings, config, options));
      out.matched = out.matched && out.questions.back().match;
    }
  } catch (const std::exception &e) {
    out.error = true;
    out.error_message = e.what();
    out.matched = false;
  }
  return out;
}

static EditMemory build_memory(const std::vector<EditCase> &dataset,
                               MemoryMode mode) {
  EditMemory memory;
  memory.mode = mode;
  if (mode == MemoryMode::Full)
    for (const auto &c : dataset)
      for (const auto &e : c.edits) memory.entries.push_back(e);
  return memory;
}

static std::string mode_name(EvalMode mode) {
  switch (mode) {
  case EvalMode::Base: return "base";
  case EvalMode::Ice: return "ice";
  default: return "deck";
  }
}

RunReport evaluate(const std::vector<EditCase> &dataset,
                   const SourceFactory &make_source,
                   const EmbeddingProvider &embeddings,
                   const DecodeConfig &config, const EvalOptions &options) {
  if (dataset.empty()) throw std::invalid_argument("empty dataset");
  if (options.workers < 1) throw std::invalid_argument("workers must be >= 1");
  config.validate();

  EditMemory memory = build_memory(dataset, options.memory_mode);

  std::vector<CaseOutcome> outcomes(dataset.size());
  const std::size_t workers = std::min(options.workers, dataset.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      auto source = make_source();
      for (std::size_t i = w; i < dataset.size(); i += workers)
        outcomes[i] =
            run_case(dataset[i], memory, *source, embeddings, config, options);
    });
  }
  for (auto &t : pool) t.join();

  RunReport report;
  report.mode = mode_name(options.mode);
  report.memory_mode = options.memory_mode == MemoryMode::Single ? "single" : "full";
  report.config = config;
  report.cases = std::move(outcomes);

  std::size_t matches = 0;
  for (const auto &c : report.cases) {
    if (c.matched) ++matches;
    for (const auto &q : c.questions)
      report.new_token_probs.push_back(q.new_token_prob);
    if (!c.error && !c.questions.empty()) {
      RankRecord rec;
      rec.fact_id = c.id;
      rec.kind = KnowledgeKind::New;
      rec.phase = EditPhase::PostEdit;
      rec.logit = c.questions.front().new_token_logit;
      rec.prob = c.questions.front().new_token_prob;
      rec.rank = c.questions.front().new_token_rank;
      report.rank_records.push_back(std::move(rec));
    }
  }
  report.accuracy =
      static_cast<double>(matches) / static_cast<double>(report.cases.size());
  return report;
}

RunReport evaluate(const std::vector<EditCase> &dataset,
                   const LogitSource &source, const EmbeddingProvider &embeddings,
                   const DecodeConfig &config, const EvalOptions &options) {
  auto factory = [&source]() {
    return std::shared_ptr<const LogitSource>(&source, [](const LogitSource *) {});
  };
  return evaluate(dataset, factory, embeddings, config, options);
}

std::vector<StubbornnessReport>
stubborn_run(const std::vector<EditCase> &dataset, const LogitSource &source,
             const EmbeddingProvider &embeddings, const DecodeConfig &config,
             const EvalOptions &options, std::size_t attempts) {
  if (attempts < 1) throw std::invalid_argument("attempts must be >= 1");
  EditMemory memory = build_memory(dataset, options.memory_mode);
  std::map<std::string, std::vector<bool>> outcomes;
  for (const auto &edit_case : dataset) {
    auto &results = outcomes[edit_case.id];
    for (std::size_t a = 0; a < attempts; ++a) {
      const std::string &question =
          edit_case.questions[a % edit_case.questions.size()];
      QuestionOutcome q = run_question(edit_case, question, memory, source,
                                       embeddings, config, options);
      results.push_back(q.match);
    }
  }
  return classify_stubborn(outcomes);
}

std::vector<RankRecord> shift_stats(const std::vector<EditCase> &dataset,
                                    const LogitSource &source,
                                    const EvalOptions &options) {
  const Vocab &vocab = source.vocab();
  EditMemory memory = build_memory(dataset, options.memory_mode);
  std::vector<RankRecord> records;
  for (const auto &edit_case : dataset) {
    const std::string &question = edit_case.questions.front();
    auto edits = retrieve_edits(memory, edit_case, question, options.retrieve_k);
    TokenSeq ice_tokens = tokenize(
        build_ice_prompt(edit_case, question, edits, options.prompt_template),
        vocab);
    TokenSeq base_tokens =
        tokenize(build_base_prompt(question, options.prompt_template), vocab);
    TokenSeq new_tokens = tokenize(edit_case.expected_answer, vocab);
    TokenSeq old_tokens = tokenize(edit_case.original_answer, vocab);
    if (new_tokens.empty() || old_tokens.empty())
      throw std::runtime_error("answer tokenizes to empty for case " +
                               edit_case.id);
    auto recs = knowledge_shift(source, edit_case.id, base_tokens, ice_tokens,
                                new_tokens.front(), old_tokens.front());
    records.insert(records.end(), recs.begin(), recs.end());
  }
  return records;
}

static json config_to_json(const DecodeConfig &c) {
  return json{{"gamma", c.gamma},
              {"alpha_freq", c.alpha_freq},
              {"alpha_enh", c.alpha_enh},
              {"beta", c.beta},
              {"lambda", c.lambda},
              {"eps_freq", c.eps_freq},
              {"eps_q", c.eps_q},
              {"tau", c.tau},
              {"max_tokens", c.max_tokens},
              {"stop_tokens", c.stop_tokens},
              {"sampling", c.sampling == Sampling::Greedy ? "greedy" : "temperature"},
              {"seed", c.seed},
              {"clamp_freq_weight", c.clamp_freq_weight}};
}

static json rank_record_to_json(const RankRecord &r) {
  return json{{"fact_id", r.fact_id}, {"kind", to_string(r.kind)},
              {"phase", to_string(r.phase)}, {"token", r.first_token},
              {"logit", r.logit},         {"prob", r.prob},
              {"rank", r.rank}};
}

std::string report_to_json(const RunReport &report) {
  json j;
  j["mode"] = report.mode;
  j["memory_mode"] = report.memory_mode;
  j["config"] = config_to_json(report.config);
  j["accuracy"] = report.accuracy;
  j["cases"] = json::array();
  for (const auto &c : report.cases) {
    json jc{{"id", c.id}, {"matched", c.matched}, {"error", c.error}};
    if (c.error) jc["error_message"] = c.error_message;
    jc["questions"] = json::array();
    for (const auto &q : c.questions)
      jc["questions"].push_back(json{{"question", q.question},
                                     {"generated", q.generated},
                                     {"match", q.match},
                                     {"steps", q.steps},
                                     {"new_token_prob", q.new_token_prob},
                                     {"new_token_rank", q.new_token_rank},
                                     {"new_token_logit", q.new_token_logit}});
    j["cases"].push_back(std::move(jc));
  }
  j["rank_records"] = json::array();
  for (const auto &r : report.rank_records)
    j["rank_records"].push_back(rank_record_to_json(r));
  j["new_token_probs"] = report.new_token_probs;
  return j.dump(2);
}

void write_report(const RunReport &report, const std::string &path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report: " + path);
  out << report_to_json(report) << "\n";
}

RunReport report_from_json_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open report: " + path);
  json j = json::parse(in);
  RunReport report;
  report.mode = j.value("mode", "");
  report.memory_mode = j.value("memory_mode", "");
  report.accuracy = j.value("accuracy", 0.0);
  for (const auto &jr : j.value("rank_records", json::array())) {
    RankRecord r;
    r.fact_id = jr.at("fact_id").get<std::string>();
    r.kind = jr.at("kind").get<std::string>() == "new" ? KnowledgeKind::New
                                                       : KnowledgeKind::Parametric;
    r.phase = jr.at("phase").get<std::string>() == "pre-edit"
                  ? EditPhase::PreEdit
                  : EditPhase::PostEdit;
    r.first_token = jr.at("token").get<TokenId>();
    r.logit = jr.at("logit").get<double>();
    r.prob = jr.at("prob").get<double>();
    r.rank = jr.at("rank").get<std::size_t>();
    report.rank_records.push_back(std::move(r));
  }
  report.new_token_probs =
      j.value("new_token_probs", std::vector<double>{});
  for (const auto &jc : j.value("cases", json::array())) {
    CaseOutcome c;
    c.id = jc.at("id").get<std::string>();
    c.matched = jc.at("matched").get<bool>();
    c.error = jc.value("error", false);
    report.cases.push_back(std::move(c));
  }
  return report;
}

void write_rank_records_csv(const std::vector<RankRecord> &records,
                            const std::string &path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write csv: " + path);
  out << "fact_id,kind,phase,token,logit,prob,rank\n";
  for (const auto &r : records)
    out << r.fact_id << ',' << to_string(r.kind) << ',' << to_string(r.phase)
        << ',' << r.first_token << ',' << r.logit << ',' << r.prob << ','
        << r.rank << '\n';
}

void write_stubbornness_csv(const std::vector<StubbornnessReport> &reports,
                            const std::string &path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write csv: " + path);
  out << "fact_id,attempts,failures,failure_fraction,bucket\n";
  for (const auto &r : reports)
    out << r.fact_id << ',' << r.attempts << ',' << r.failures << ','
        << r.failure_fraction << ',' << to_string(r.bucket) << '\n';
}

void write_histogram_csv(const Histogram &hist, const std::string &path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write csv: " + path);
  out << "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < hist.counts.size(); ++i)
    out << hist.edges[i] << ',' << hist.edges[i + 1] << ',' << hist.counts[i]
        << '\n';
}

void write_rank_table_csv(const std::vector<RankBucketRow> &rows,
                          const std::string &path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write csv: " + path);
  out << "bucket_lo,bucket_hi,count,mean_baseline_rank,mean_contrast_rank,"
         "mean_improvement\n";
  for (const auto &r : rows)
    out << r.bucket.lo << ',' << r.bucket.hi << ',' << r.count << ','
        << r.mean_baseline_rank << ',' << r.mean_contrast_rank << ','
        << r.mean_improvement << '\n';
}

} // namespace deck
