// Copyright 2026 The DeCK Authors
// SPDX-License-Identifier: Apache-2.0

#include "deck/enhancement.hpp"
#include "deck/simd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace deck {

EditTokenSet EditTokenSet::from_tokens(const TokenSeq &tokens) {
  EditTokenSet set;
  for (TokenId id : tokens) set.freq[id] += 1;
  set.support.reserve(set.freq.size());
  for (const auto &[id, n] : set.freq) set.support.push_back(id);
  std::sort(set.support.begin(), set.support.end());
  return set;
}

double freq_weight(std::size_t freq, double eps_freq, double alpha_freq,
                   bool clamp) {
  if (!(eps_freq > 0)) throw std::invalid_argument("eps_freq must be > 0");
  if (!(alpha_freq > 0)) throw std::invalid_argument("alpha_freq must be > 0");
  double w = std::log(static_cast<double>(freq) + eps_freq);
  if (clamp) w = std::max(0.0, w);
  return w * alpha_freq;
}

static double cosine(const std::vector<double> &a, const std::vector<double> &b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

RelevanceVector relevance_scores(const Vocab &vocab, const EditTokenSet &edits,
                                 const EmbeddingProvider &embeddings,
                                 double eps_freq, double alpha_freq,
                                 bool clamp) {
  const std::size_t dim = embeddings.dim();
  std::vector<std::vector<double>> edit_vecs;
  edit_vecs.reserve(edits.support.size());
  for (TokenId e : edits.support) {
    auto v = embeddings.embed(e);
    if (v.size() != dim) throw std::invalid_argument("embedding dimension mismatch");
    edit_vecs.push_back(std::move(v));
  }

  RelevanceVector out;
  out.scores.resize(vocab.size(), 0.0);
  for (std::size_t v = 0; v < vocab.size(); ++v) {
    auto ev = embeddings.embed(static_cast<TokenId>(v));
    if (ev.size() != dim) throw std::invalid_argument("embedding dimension mismatch");
    double best = 0.0;
    for (const auto &e : edit_vecs) best = std::max(best, cosine(ev, e));
    std::size_t f = 0;
    if (auto it = edits.freq.find(static_cast<TokenId>(v)); it != edits.freq.end())
      f = it->second;
    out.scores[v] = best * freq_weight(f, eps_freq, alpha_freq, clamp);
  }
  return out;
}

LogitVector enhance_logits(const LogitVector &logits, const RelevanceVector &s,
                           double alpha_enh, double beta) {
  if (logits.values.size() != s.scores.size())
    throw std::invalid_argument("logits/relevance length mismatch");
  if (!(alpha_enh > 0)) throw std::invalid_argument("alpha_enh must be > 0");
  if (!(beta >= 0)) throw std::invalid_argument("beta must be >= 0");
  LogitVector out;
  out.values.resize(logits.values.size());
  simd::axpby(alpha_enh, logits.values, beta, s.scores, out.values);
  return out;
}

ProbVector target_distribution(const EditTokenSet &edits, const Vocab &vocab,
                               double eps_q) {
  if (!(eps_q > 0)) throw std::invalid_argument("eps_q must be > 0");
  if (edits.support.empty()) throw std::invalid_argument("empty edit set");
  const double m = static_cast<double>(edits.support.size());
  ProbVector out;
  out.values.assign(vocab.size(), eps_q);
  for (TokenId e : edits.support) {
    if (e < 0 || static_cast<std::size_t>(e) >= vocab.size())
      throw std::out_of_range("unknown token: id " + std::to_string(e));
    out.values[static_cast<std::size_t>(e)] = 1.0 / m;
  }
  double sum = simd::reduce_sum(out.values);
  simd::scale(out.values, 1.0 / sum, out.values);
  return out;
}

double ked(const ProbVector &p, const ProbVector &q,
           const RelevanceVector &weights) {
  const std::size_t n = p.values.size();
  if (q.values.size() != n || weights.scores.size() != n)
    throw std::invalid_argument("ked: length mismatch");

  std::vector<double> w(n);
  double wsum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::max(0.0, weights.scores[i]);
    wsum += w[i];
  }
  if (wsum == 0.0) {
    std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(n));
  } else {
    for (double &x : w) x /= wsum;
  }

  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double pi = p.values[i], qi = q.values[i];
    const double mi = 0.5 * (pi + qi);
    double term = 0.0;
    if (pi > 0.0) term += pi * std::log(pi / mi);
    if (qi > 0.0) term += qi * std::log(qi / mi);
    acc += w[i] * term;
  }
  return 0.5 * acc;
}

} // namespace deck
