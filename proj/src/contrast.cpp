// Copyright 2026 The DeCK Authors
// SPDX-License-Identifier: Apache-2.0

#include "deck/contrast.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace deck {

static constexpr double kBaseFloor = 1e-12;

DualContext DualContext::from_prompts(TokenSeq prompt_e, TokenSeq prompt_b) {
  if (prompt_e.empty() || prompt_b.empty())
    throw std::invalid_argument("empty prompt");
  DualContext ctx;
  ctx.seq_e = std::move(prompt_e);
  ctx.seq_b = std::move(prompt_b);
  return ctx;
}

void DualContext::append(TokenId token) {
  seq_e.push_back(token);
  seq_b.push_back(token);
  generated.push_back(token);
}

HeadSet apc_head(const ProbVector &p_enh, double lambda) {
  if (!(lambda > 0 && lambda <= 1))
    throw std::invalid_argument("lambda must be in (0, 1]");
  double pmax = 0.0;
  for (double p : p_enh.values) pmax = std::max(pmax, p);
  const double cutoff = lambda * pmax;
  HeadSet head;
  head.mask.assign(p_enh.values.size(), 0);
  for (std::size_t v = 0; v < p_enh.values.size(); ++v) {
    if (p_enh.values[v] >= cutoff) {
      head.mask[v] = 1;
      head.members.push_back(static_cast<TokenId>(v));
    }
  }
  return head;
}

LogitVector contrast_scores(const ProbVector &p_enh, const ProbVector &p_base,
                            double gamma, const HeadSet &head) {
  if (!(gamma >= 0)) throw std::invalid_argument("gamma must be >= 0");
  if (head.members.empty()) throw std::runtime_error("empty support");
  if (p_enh.values.size() != p_base.values.size())
    throw std::invalid_argument("distribution length mismatch");
  LogitVector out;
  out.values.assign(p_enh.values.size(),
                    -std::numeric_limits<double>::infinity());
  for (TokenId v : head.members) {
    const auto i = static_cast<std::size_t>(v);
    out.values[i] = std::log(p_enh.values[i]) -
                    gamma * std::log(std::max(p_base.values[i], kBaseFloor));
  }
  return out;
}

DeckSession::DeckSession(const LogitSource &source, const EditTokenSet &edits,
                         const EmbeddingProvider &embeddings,
                         DecodeConfig config)
    : source_(source), embeddings_(embeddings), config_(std::move(config)),
      rng_(config_.seed) {
  config_.validate();
  relevance_ = relevance_scores(source_.vocab(), edits, embeddings_,
                                config_.eps_freq, config_.alpha_freq,
                                config_.clamp_freq_weight);
}

TokenId DeckSession::select(const ProbVector &final_dist) {
  if (config_.sampling == Sampling::Greedy) return argmax(final_dist.values);
  // Inverse-CDF over the raw 64-bit draw; deterministic for a given seed.
  const double u =
      static_cast<double>(rng_() >> 11) * 0x1.0p-53; // uniform in [0,1)
  double acc = 0.0;
  TokenId last = 0;
  for (std::size_t v = 0; v < final_dist.values.size(); ++v) {
    if (final_dist.values[v] <= 0.0) continue;
    acc += final_dist.values[v];
    last = static_cast<TokenId>(v);
    if (u < acc) return last;
  }
  return last;
}

StepDistributions deck_distributions(const TokenSeq &seq_e, const TokenSeq &seq_b,
                                     const LogitSource &source,
                                     const RelevanceVector &relevance,
                                     const DecodeConfig &config) {
  StepDistributions d;
  LogitVector logits_e = source.next_logits(seq_e);
  d.base_logits = source.next_logits(seq_b);

  d.enhanced = enhance_logits(logits_e, relevance, config.alpha_enh, config.beta);
  d.p_enh = softmax(d.enhanced, config.tau);
  d.p_base = softmax(d.base_logits, config.tau);

  d.head = apc_head(d.p_enh, config.lambda);
  LogitVector scores = contrast_scores(d.p_enh, d.p_base, config.gamma, d.head);
  // Temperature applies to the model distributions only, not to the
  // contrast scores.
  d.final_dist = softmax(scores, 1.0);
  return d;
}

std::pair<TokenId, StepTrace> DeckSession::decode_step(DualContext &ctx) {
  StepDistributions d =
      deck_distributions(ctx.seq_e, ctx.seq_b, source_, relevance_, config_);
  const LogitVector &logits_b = d.base_logits;
  const LogitVector &enhanced = d.enhanced;
  const ProbVector &p_enh = d.p_enh;
  const ProbVector &p_base = d.p_base;
  const HeadSet &head = d.head;
  const ProbVector &final_dist = d.final_dist;

  TokenId chosen = select(final_dist);

  StepTrace trace;
  trace.step = step_++;
  trace.head_size = head.members.size();
  trace.chosen = chosen;
  const auto ci = static_cast<std::size_t>(chosen);
  trace.logit_e = enhanced.values[ci];
  trace.logit_b = logits_b.values[ci];
  trace.prob_e = p_enh.values[ci];
  trace.prob_b = p_base.values[ci];
  trace.prob_final = final_dist.values[ci];
  trace.rank_e = rank_of(p_enh.values, chosen);
  trace.rank_b = rank_of(p_base.values, chosen);

  ctx.append(chosen);
  return {chosen, trace};
}

GenerationTrace DeckSession::generate(TokenSeq prompt_e, TokenSeq prompt_b) {
  DualContext ctx = DualContext::from_prompts(std::move(prompt_e), std::move(prompt_b));
  GenerationTrace trace;
  trace.stop_reason = StopReason::MaxTokens;
  for (std::size_t i = 0; i < config_.max_tokens; ++i) {
    auto [token, step] = decode_step(ctx);
    trace.steps.push_back(step);
    if (config_.stop_tokens.count(token)) {
      trace.stop_reason = StopReason::StopToken;
      break;
    }
    trace.tokens.push_back(token);
  }
  for (std::size_t i = 0; i < trace.tokens.size(); ++i) {
    if (i) trace.text += ' ';
    trace.text += source_.vocab().token(trace.tokens[i]);
  }
  return trace;
}

GenerationTrace generate(const TokenSeq &prompt_e, const TokenSeq &prompt_b,
                         const LogitSource &source, const EditTokenSet &edits,
                         const EmbeddingProvider &embeddings,
                         const DecodeConfig &config) {
  DeckSession session(source, edits, embeddings, config);
  return session.generate(prompt_e, prompt_b);
}

GenerationTrace greedy_generate(const TokenSeq &prompt, const LogitSource &source,
                                const DecodeConfig &config) {
  GenerationTrace trace;
  trace.stop_reason = StopReason::MaxTokens;
  TokenSeq ctx = prompt;
  if (ctx.empty()) throw std::invalid_argument("empty prompt");
  for (std::size_t i = 0; i < config.max_tokens; ++i) {
    LogitVector logits = source.next_logits(ctx);
    TokenId token = argmax(logits.values);
    StepTrace step;
    step.step = i;
    step.chosen = token;
    step.logit_e = logits.values[static_cast<std::size_t>(token)];
    step.rank_e = 1;
    trace.steps.push_back(step);
    ctx.push_back(token);
    if (config.stop_tokens.count(token)) {
      trace.stop_reason = StopReason::StopToken;
      break;
    }
    trace.tokens.push_back(token);
  }
  for (std::size_t i = 0; i < trace.tokens.size(); ++i) {
    if (i) trace.text += ' ';
    trace.text += source.vocab().token(trace.tokens[i]);
  }
  return trace;
}

} // namespace deck
