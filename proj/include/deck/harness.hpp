// Copyright 2026 The DeCK Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "deck/core.hpp"

#include <string>
#include <vector>

namespace deck {

constexpr TokenId kUnkToken = 0;

/// One fact edit: subject / relation / new object, with the parametric
/// object when known.
struct EditDescriptor {
  std::string subject;
  std::string relation;
  std::string old_object; // empty when unknown
  std::string new_object;
};

struct EditCase {
  std::string id;
  std::vector<EditDescriptor> edits;
  std::vector<std::string> questions; // paraphrases of the same question
  std::string expected_answer;        // post-edit
  std::string original_answer;        // parametric
  std::size_t hops = 1;
};

enum class MemoryMode { Single, Full };

/// Edit store for the full-batch setting; single mode exposes only the
/// case's own edits.
struct EditMemory {
  std::vector<EditDescriptor> entries;
  MemoryMode mode = MemoryMode::Single;
};

/// JSONL, one EditCase per line. Schema errors carry the line number;
/// duplicate ids are rejected.
std::vector<EditCase> load_dataset(const std::string &path);

/// Single mode: the case's own edits verbatim. Full mode: top-k entries by
/// token overlap with the question, ties by entry order.
std::vector<EditDescriptor> retrieve_edits(const EditMemory &memory,
                                           const EditCase &edit_case,
                                           const std::string &question,
                                           std::size_t k);

/// Prompt rendering. {edits} and {question} are the required placeholders;
/// `prefix` stands in for user-supplied demonstration text.
struct PromptTemplate {
  std::string prefix;
  std::string body = "{edits}{question}";
  std::string edit_line = "Assume {subject}'s {relation} is {new_object}. ";
};

std::string build_ice_prompt(const EditCase &edit_case, const std::string &question,
                             const std::vector<EditDescriptor> &edits,
                             const PromptTemplate &tmpl = {});

/// The base prompt is the same template with an empty edit block.
std::string build_base_prompt(const std::string &question,
                              const PromptTemplate &tmpl = {});

/// Case-insensitive containment of the normalized expected answer in the
/// normalized generated text.
bool answer_match(const std::string &generated, const std::string &expected);

/// Lowercased whitespace tokenization; unknown words map to id 0 (UNK).
TokenSeq tokenize(const std::string &text, const Vocab &vocab);

std::string normalize_text(const std::string &text);

} // namespace deck
