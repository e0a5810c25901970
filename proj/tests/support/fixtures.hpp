// Copyright 2026 The DeCK Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "deck/contrast.hpp"
#include "deck/evaluate.hpp"
#include "deck/harness.hpp"
#include "deck/logit_source.hpp"

#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace deck::testing {

// One synthetic fact: a question "what language does <subject> speak",
// an edit (subject, language, new_word), and the two context distributions
// a table model should emit for it. Words absent from the maps get the
// fill logit.
struct FactFixture {
  std::string id;
  std::string subject;
  std::string new_word; // expected (edited) answer
  std::string old_word; // parametric answer
  std::map<std::string, double> edited_logits;
  std::map<std::string, double> base_logits;
};

struct FixtureSet {
  Vocab vocab;
  std::unique_ptr<TableModel> model;
  std::vector<EditCase> cases;
  TokenId eos = 0;
};

inline std::string fact_question(const FactFixture &f) {
  return "what language does " + f.subject + " speak";
}

inline FixtureSet build_fixture_set(const std::vector<FactFixture> &facts,
                                    double fill_logit = -20.0) {
  std::vector<std::string> words = {"<unk>",    "<eos>", "assume", "language",
                                    "is",       "what",  "does",   "speak"};
  auto add = [&words](const std::string &w) {
    for (const auto &x : words)
      if (x == w) return;
    words.push_back(w);
  };
  for (const auto &f : facts) {
    add(f.subject);
    add(f.new_word);
    add(f.old_word);
    for (const auto &[w, l] : f.edited_logits) add(w);
    for (const auto &[w, l] : f.base_logits) add(w);
  }

  Vocab vocab(words);
  const TokenId eos = *vocab.id_of("<eos>");

  auto make_logits = [&](const std::map<std::string, double> &m) {
    LogitVector v;
    v.values.assign(vocab.size(), fill_logit);
    for (const auto &[w, l] : m) v.values[static_cast<std::size_t>(*vocab.id_of(w))] = l;
    return v;
  };

  LogitVector eos_logits;
  eos_logits.values.assign(vocab.size(), fill_logit);
  eos_logits.values[static_cast<std::size_t>(eos)] = 10.0;

  std::vector<TableModel::Rule> rules;
  std::vector<EditCase> cases;
  PromptTemplate tmpl;
  for (const auto &f : facts) {
    EditCase c;
    c.id = f.id;
    c.edits.push_back({f.subject, "language", f.old_word, f.new_word});
    c.questions.push_back(fact_question(f));
    c.expected_answer = f.new_word;
    c.original_answer = f.old_word;

    TokenSeq base_tokens = tokenize(build_base_prompt(c.questions[0], tmpl), vocab);
    TokenSeq ice_tokens =
        tokenize(build_ice_prompt(c, c.questions[0], c.edits, tmpl), vocab);
    // The edited-context rule keys on [is, <new_word>, <question...>] so it
    // never fires for the bare question; it must precede the base rule,
    // whose pattern is a suffix of it.
    TokenSeq ice_suffix(ice_tokens.end() -
                            static_cast<std::ptrdiff_t>(base_tokens.size() + 2),
                        ice_tokens.end());
    rules.push_back({ice_suffix, make_logits(f.edited_logits)});
    rules.push_back({base_tokens, make_logits(f.base_logits)});
    cases.push_back(std::move(c));
  }

  FixtureSet set{Vocab(words), nullptr, std::move(cases), eos};
  set.model = std::make_unique<TableModel>(Vocab(words), std::move(rules),
                                           std::move(eos_logits));
  return set;
}

// Fig. 3-style stubborn facts: after editing the new answer still trails the
// parametric one by `gap` in the edited context, while the base context
// strongly favors the parametric answer.
inline std::vector<FactFixture> stubborn_facts(std::size_t n,
                                               double gap = 0.516) {
  std::vector<FactFixture> facts;
  for (std::size_t i = 0; i < n; ++i) {
    FactFixture f;
    f.id = "stubborn-" + std::to_string(i);
    f.subject = "person" + std::to_string(i);
    f.new_word = "english" + std::to_string(i);
    f.old_word = "french" + std::to_string(i);
    f.edited_logits = {{f.old_word, 10.0}, {f.new_word, 10.0 - gap}};
    f.base_logits = {{f.old_word, 10.0}, {f.new_word, -5.0}};
    facts.push_back(std::move(f));
  }
  return facts;
}

// Facts whose edited-context rank of the new answer is seeded to `rank`:
// rank-1 decoys sit above it by 0.01 logit steps, and the base context
// gives every decoy high probability and the new answer a low one.
inline FactFixture ranked_fact(std::size_t index, std::size_t rank) {
  FactFixture f;
  f.id = "ranked-" + std::to_string(index);
  f.subject = "person" + std::to_string(index);
  f.new_word = "english" + std::to_string(index);
  f.old_word = "french" + std::to_string(index);
  f.edited_logits[f.new_word] = 10.0;
  f.base_logits[f.new_word] = -5.0;
  f.base_logits[f.old_word] = -5.0;
  for (std::size_t j = 1; j < rank; ++j) {
    std::string decoy = "d" + std::to_string(j);
    f.edited_logits[decoy] = 10.0 + 0.01 * static_cast<double>(j);
    f.base_logits[decoy] = 10.0;
  }
  return f;
}

inline std::shared_ptr<TableModel> random_table_model(std::mt19937_64 &rng) {
  std::uniform_int_distribution<std::size_t> vocab_size_dist(5, 24);
  std::uniform_real_distribution<double> logit_dist(-4.0, 4.0);
  const std::size_t n = vocab_size_dist(rng);

  std::vector<std::string> words;
  for (std::size_t i = 0; i < n; ++i) words.push_back("w" + std::to_string(i));
  Vocab vocab(words);

  auto random_logits = [&] {
    LogitVector v;
    v.values.resize(n);
    for (auto &x : v.values) x = logit_dist(rng);
    return v;
  };

  std::uniform_int_distribution<std::size_t> rule_count_dist(1, 6);
  std::uniform_int_distribution<std::size_t> suffix_len_dist(1, 3);
  std::uniform_int_distribution<TokenId> token_dist(0, static_cast<TokenId>(n - 1));
  std::vector<TableModel::Rule> rules;
  const std::size_t n_rules = rule_count_dist(rng);
  for (std::size_t r = 0; r < n_rules; ++r) {
    TokenSeq suffix(suffix_len_dist(rng));
    for (auto &t : suffix) t = token_dist(rng);
    rules.push_back({std::move(suffix), random_logits()});
  }
  return std::make_shared<TableModel>(std::move(vocab), std::move(rules),
                                      random_logits());
}

inline ProbVector random_prob_vector(std::mt19937_64 &rng, std::size_t n,
                                     double floor = 1e-4) {
  std::uniform_real_distribution<double> dist(floor, 1.0);
  ProbVector p;
  p.values.resize(n);
  double sum = 0.0;
  for (auto &x : p.values) {
    x = dist(rng);
    sum += x;
  }
  for (auto &x : p.values) x /= sum;
  return p;
}

} // namespace deck::testing
