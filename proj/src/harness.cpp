// Copyright 2026 The DeCK Authors
// SPDX-License-Identifier: Apache-2.0

#include "deck/harness.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace deck {

using nlohmann::json;

static std::string require_string(const json &j, const char *field,
                                  std::size_t line_no, bool allow_empty = false) {
  if (!j.contains(field) || !j[field].is_string())
    throw std::runtime_error("dataset line " + std::to_string(line_no) +
                             ": missing or non-string field '" + field + "'");
  auto s = j[field].get<std::string>();
  if (s.empty() && !allow_empty)
    throw std::runtime_error("dataset line " + std::to_string(line_no) +
                             ": empty field '" + field + "'");
  return s;
}

std::vector<EditCase> load_dataset(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);

  std::vector<EditCase> cases;
  std::set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw std::runtime_error("dataset line " + std::to_string(line_no) +
                               ": invalid JSON");
    EditCase c;
    c.id = require_string(j, "id", line_no);
    if (!seen_ids.insert(c.id).second)
      throw std::runtime_error("dataset line " + std::to_string(line_no) +
                               ": duplicate case id '" + c.id + "'");
    if (!j.contains("edits") || !j["edits"].is_array() || j["edits"].empty())
      throw std::runtime_error("dataset line " + std::to_string(line_no) +
                               ": missing or empty field 'edits'");
    for (const auto &e : j["edits"]) {
      EditDescriptor d;
      d.subject = require_string(e, "subject", line_no);
      d.relation = require_string(e, "relation", line_no);
      d.new_object = require_string(e, "new_object", line_no);
      if (e.contains("old_object") && e["old_object"].is_string())
        d.old_object = e["old_object"].get<std::string>();
      c.edits.push_back(std::move(d));
    }
    if (!j.contains("questions") || !j["questions"].is_array() ||
        j["questions"].empty())
      throw std::runtime_error("dataset line " + std::to_string(line_no) +
                               ": missing or empty field 'questions'");
    for (const auto &q : j["questions"]) {
      if (!q.is_string())
        throw std::runtime_error("dataset line " + std::to_string(line_no) +
                                 ": non-string question");
      c.questions.push_back(q.get<std::string>());
    }
    c.expected_answer = require_string(j, "expected_answer", line_no);
    c.original_answer = require_string(j, "original_answer", line_no, true);
    if (j.contains("hops")) {
      if (!j["hops"].is_number_unsigned() || j["hops"].get<std::size_t>() < 1)
        throw std::runtime_error("dataset line " + std::to_string(line_no) +
                                 ": field 'hops' must be a positive integer");
      c.hops = j["hops"].get<std::size_t>();
    }
    cases.push_back(std::move(c));
  }
  return cases;
}

static std::vector<std::string> split_words(const std::string &text) {
  std::vector<std::string> words;
  std::istringstream ss(text);
  std::string w;
  while (ss >> w) words.push_back(w);
  return words;
}

static std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<EditDescriptor> retrieve_edits(const EditMemory &memory,
                                           const EditCase &edit_case,
                                           const std::string &question,
                                           std::size_t k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (memory.mode == MemoryMode::Single) return edit_case.edits;
  if (memory.entries.empty()) return {};

  std::set<std::string> question_tokens;
  for (const auto &w : split_words(lower(question))) question_tokens.insert(w);

  std::vector<std::pair<std::size_t, std::size_t>> scored; // (overlap, index)
  for (std::size_t i = 0; i < memory.entries.size(); ++i) {
    const auto &e = memory.entries[i];
    std::set<std::string> entry_tokens;
    for (const auto &w : split_words(
             lower(e.subject + " " + e.relation + " " + e.new_object)))
      entry_tokens.insert(w);
    std::size_t overlap = 0;
    for (const auto &w : entry_tokens)
      if (question_tokens.count(w)) ++overlap;
    scored.emplace_back(overlap, i);
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto &a, const auto &b) { return a.first > b.first; });

  std::vector<EditDescriptor> out;
  for (std::size_t i = 0; i < scored.size() && i < k; ++i)
    out.push_back(memory.entries[scored[i].second]);
  return out;
}

static void replace_all(std::string &s, const std::string &from,
                        const std::string &to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

static std::string render(const PromptTemplate &tmpl, const std::string &edit_block,
                          const std::string &question) {
  if (tmpl.body.find("{edits}") == std::string::npos ||
      tmpl.body.find("{question}") == std::string::npos)
    throw std::invalid_argument(
        "template must contain {edits} and {question} placeholders");
  std::string out = tmpl.prefix + tmpl.body;
  replace_all(out, "{edits}", edit_block);
  replace_all(out, "{question}", question);
  return out;
}

std::string build_ice_prompt(const EditCase &, const std::string &question,
                             const std::vector<EditDescriptor> &edits,
                             const PromptTemplate &tmpl) {
  std::string block;
  for (const auto &e : edits) {
    std::string line = tmpl.edit_line;
    replace_all(line, "{subject}", e.subject);
    replace_all(line, "{relation}", e.relation);
    replace_all(line, "{new_object}", e.new_object);
    block += line;
  }
  return render(tmpl, block, question);
}

std::string build_base_prompt(const std::string &question,
                              const PromptTemplate &tmpl) {
  return render(tmpl, "", question);
}

std::string normalize_text(const std::string &text) {
  std::string out;
  for (const auto &w : split_words(lower(text))) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  while (!out.empty() && (out.back() == '.' || out.back() == '!' ||
                          out.back() == '?' || out.back() == ','))
    out.pop_back();
  return out;
}

bool answer_match(const std::string &generated, const std::string &expected) {
  std::string g = normalize_text(generated);
  std::string e = normalize_text(expected);
  if (e.empty()) return false;
  return g.find(e) != std::string::npos;
}

TokenSeq tokenize(const std::string &text, const Vocab &vocab) {
  TokenSeq out;
  for (const auto &w : split_words(lower(text))) {
    // strip the punctuation that prompt rendering introduces
    std::string word = w;
    while (!word.empty() && (word.back() == '.' || word.back() == ',' ||
                             word.back() == '?' || word.back() == '!'))
      word.pop_back();
    if (word.empty()) continue;
    auto id = vocab.id_of(word);
    out.push_back(id.value_or(kUnkToken));
  }
  return out;
}

} // namespace deck
