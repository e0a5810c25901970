// Copyright 2026 The DeCK Authors
// SPDX-License-Identifier: Apache-2.0

// End-to-end acceptance suite: one pass/fail line per criterion.

#include "deck/contrast.hpp"
#include "deck/evaluate.hpp"
#include "deck/remote.hpp"
#include "support/fixtures.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

using namespace deck;
using namespace deck::testing;

namespace {

int g_failures = 0;

void run_criterion(int number, const std::string &name,
                   const std::function<void()> &body) {
  auto start = std::chrono::steady_clock::now();
  std::string failure;
  try {
    body();
  } catch (const std::exception &e) {
    failure = e.what();
  }
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - start)
                .count();
  if (failure.empty()) {
    std::printf("PASS  criterion %2d: %s (%lld ms)\n", number, name.c_str(),
                static_cast<long long>(ms));
  } else {
    ++g_failures;
    std::printf("FAIL  criterion %2d: %s (%lld ms)\n      %s\n", number,
                name.c_str(), static_cast<long long>(ms), failure.c_str());
  }
}

void require(bool condition, const std::string &message) {
  if (!condition) throw std::runtime_error(message);
}

// ---------------------------------------------------------------------------

void criterion_degeneration() {
  std::mt19937_64 rng(101);
  for (int fixture = 0; fixture < 120; ++fixture) {
    auto model = random_table_model(rng);
    const std::size_t n = model->vocab().size();

    DecodeConfig config;
    config.gamma = 0.0;
    config.beta = 0.0;
    config.alpha_enh = 1.0;
    config.max_tokens = 10;
    config.stop_tokens = {static_cast<TokenId>(rng() % n)};

    TokenSeq prompt_e, prompt_b;
    for (std::size_t i = 0; i < 1 + rng() % 4; ++i)
      prompt_e.push_back(static_cast<TokenId>(rng() % n));
    for (std::size_t i = 0; i < 1 + rng() % 4; ++i)
      prompt_b.push_back(static_cast<TokenId>(rng() % n));

    TokenSeq edit_tokens;
    for (std::size_t i = 0; i < 1 + rng() % 4; ++i)
      edit_tokens.push_back(static_cast<TokenId>(rng() % n));
    EditTokenSet edits = EditTokenSet::from_tokens(edit_tokens);
    OneHotEmbeddings emb(n);

    GenerationTrace deck_out =
        generate(prompt_e, prompt_b, *model, edits, emb, config);
    GenerationTrace plain = greedy_generate(prompt_e, *model, config);
    require(deck_out.text == plain.text,
            "fixture " + std::to_string(fixture) + ": '" + deck_out.text +
                "' != '" + plain.text + "'");
  }
}

void criterion_flip_inequality() {
  std::mt19937_64 rng(103);
  std::size_t checked = 0;
  while (checked < 1000) {
    std::size_t n = 2 + rng() % 8;
    ProbVector p_enh = random_prob_vector(rng, n, 0.01);
    ProbVector p_base = random_prob_vector(rng, n, 0.01);
    double gamma = std::uniform_real_distribution<double>(0.0, 1.5)(rng);
    TokenId tok_new = static_cast<TokenId>(rng() % n);
    TokenId tok_par = static_cast<TokenId>(rng() % n);
    if (tok_new == tok_par) continue;

    HeadSet head = apc_head(p_enh, 1e-9); // keep both designated tokens in
    LogitVector scores = contrast_scores(p_enh, p_base, gamma, head);

    double lhs = std::log(p_enh.values[tok_par]) - std::log(p_enh.values[tok_new]);
    double rhs = gamma * (std::log(p_base.values[tok_par]) -
                          std::log(p_base.values[tok_new]));
    if (std::abs(lhs - rhs) < 1e-9) continue; // exclusion band
    bool flipped = scores.values[tok_new] > scores.values[tok_par];
    require(flipped == (lhs < rhs), "ordering disagrees with the inequality");
    ++checked;
  }
}

void criterion_stubborn_reproduction() {
  FixtureSet set = build_fixture_set(stubborn_facts(10, 0.516));
  OneHotEmbeddings emb(set.vocab.size());
  DecodeConfig config; // gamma 0.2, lambda 0.1 defaults
  config.stop_tokens = {set.eos};
  config.max_tokens = 4;

  EvalOptions ice_opts;
  ice_opts.mode = EvalMode::Ice;
  RunReport ice = evaluate(set.cases, *set.model, emb, config, ice_opts);
  require(ice.accuracy == 0.0,
          "ice accuracy " + std::to_string(ice.accuracy) + " != 0");

  EvalOptions deck_opts;
  deck_opts.mode = EvalMode::Deck;
  RunReport deck_report = evaluate(set.cases, *set.model, emb, config, deck_opts);
  require(deck_report.accuracy == 1.0,
          "deck accuracy " + std::to_string(deck_report.accuracy) + " != 1");
}

void criterion_apc_invariants() {
  std::mt19937_64 rng(107);
  for (int rep = 0; rep < 10000; ++rep) {
    std::size_t n = 2 + rng() % 30;
    ProbVector p = random_prob_vector(rng, n);
    double lambda = std::uniform_real_distribution<double>(1e-9, 1.0)(rng);
    HeadSet head = apc_head(p, lambda);
    require(!head.members.empty(), "empty head");
    require(head.contains(argmax(p.values)), "argmax not in head");

    ProbVector base = random_prob_vector(rng, n);
    ProbVector final_dist = softmax(contrast_scores(p, base, 0.3, head));
    for (std::size_t v = 0; v < n; ++v)
      if (!head.contains(static_cast<TokenId>(v)))
        require(final_dist.values[v] == 0.0, "off-head prob not exactly 0");
  }
}

void criterion_ked_properties() {
  std::mt19937_64 rng(109);
  const double ln2 = std::log(2.0);
  for (int rep = 0; rep < 10000; ++rep) {
    std::size_t n = 2 + rng() % 12;
    ProbVector p = random_prob_vector(rng, n);
    ProbVector q = random_prob_vector(rng, n);
    RelevanceVector w;
    w.scores.resize(n);
    for (auto &s : w.scores)
      s = std::uniform_real_distribution<double>(0.0, 1.0)(rng);

    double d = ked(p, q, w);
    require(std::abs(d - ked(q, p, w)) < 1e-12, "symmetry violated");
    require(ked(p, p, w) < 1e-15, "identity not zero");
    require(d >= 0.0 && d <= ln2 + 1e-12, "out of [0, ln2]");

    // independent weighted-JSD oracle in extended precision
    long double wsum = 0.0L;
    for (double s : w.scores) wsum += s;
    long double oracle = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
      long double wi = wsum > 0 ? w.scores[i] / wsum : 1.0L / n;
      long double m = (static_cast<long double>(p.values[i]) + q.values[i]) / 2;
      if (p.values[i] > 0) oracle += wi * p.values[i] * logl(p.values[i] / m) / 2;
      if (q.values[i] > 0) oracle += wi * q.values[i] * logl(q.values[i] / m) / 2;
    }
    require(std::abs(d - static_cast<double>(oracle)) < 1e-9,
            "disagrees with the weighted-JSD oracle");
  }
}

void criterion_dual_sequence_sync() {
  std::mt19937_64 rng(113);
  std::vector<std::string> words;
  for (int i = 0; i < 16; ++i) words.push_back("w" + std::to_string(i));
  std::vector<TokenSeq> corpus;
  for (int s = 0; s < 30; ++s) {
    TokenSeq seq;
    for (int i = 0; i < 50; ++i) seq.push_back(static_cast<TokenId>(rng() % 16));
    corpus.push_back(std::move(seq));
  }
  NGramModel model = train_ngram(Vocab(words), corpus, 3, 0.5);

  DecodeConfig config;
  config.max_tokens = 1000;
  config.sampling = Sampling::Temperature;
  config.seed = 7;
  EditTokenSet edits = EditTokenSet::from_tokens({1, 2, 2, 3});
  OneHotEmbeddings emb(16);

  DeckSession session(model, edits, emb, config);
  DualContext ctx = DualContext::from_prompts({0, 1, 2}, {3, 4});
  const auto diff = ctx.seq_e.size() - ctx.seq_b.size();
  for (int step = 0; step < 1000; ++step) {
    session.decode_step(ctx);
    require(ctx.seq_e.size() - ctx.seq_b.size() == diff,
            "length difference drifted");
    require(std::equal(ctx.generated.rbegin(), ctx.generated.rend(),
                       ctx.seq_e.rbegin()) &&
                std::equal(ctx.generated.rbegin(), ctx.generated.rend(),
                           ctx.seq_b.rbegin()),
            "shared suffix broken");
  }
  require(ctx.generated.size() == 1000, "wrong number of steps");
}

void criterion_rank_improvement() {
  // 10 facts per Table-3-style bucket, ranks seeded inside each range
  const std::vector<RankBucket> buckets = default_rank_buckets();
  std::vector<FactFixture> facts;
  std::mt19937_64 rng(127);
  std::size_t index = 0;
  for (const auto &b : buckets) {
    for (int i = 0; i < 10; ++i) {
      std::size_t rank = b.lo + rng() % (b.hi - b.lo + 1);
      facts.push_back(ranked_fact(index++, rank));
    }
  }
  FixtureSet set = build_fixture_set(facts);
  OneHotEmbeddings emb(set.vocab.size());
  DecodeConfig config;
  config.stop_tokens = {set.eos};
  config.max_tokens = 4;

  EvalOptions ice_opts;
  ice_opts.mode = EvalMode::Ice;
  RunReport ice = evaluate(set.cases, *set.model, emb, config, ice_opts);
  EvalOptions deck_opts;
  RunReport deck_report = evaluate(set.cases, *set.model, emb, config, deck_opts);

  auto rows = rank_improvement(ice.rank_records, deck_report.rank_records, buckets);
  for (const auto &row : rows) {
    require(row.count == 10, "bucket not fully seeded");
    require(row.mean_improvement > 0.0, "no strict improvement in bucket " +
                                            std::to_string(row.bucket.lo));
  }

  // brute-force grouping oracle
  for (const auto &row : rows) {
    double sum_ice = 0, sum_deck = 0;
    std::size_t count = 0;
    for (const auto &r : ice.rank_records) {
      if (r.rank >= row.bucket.lo && r.rank <= row.bucket.hi) {
        ++count;
        sum_ice += static_cast<double>(r.rank);
        for (const auto &d : deck_report.rank_records)
          if (d.fact_id == r.fact_id) sum_deck += static_cast<double>(d.rank);
      }
    }
    require(count == row.count, "oracle count mismatch");
    require(row.mean_baseline_rank == sum_ice / static_cast<double>(count),
            "oracle baseline mean mismatch");
    require(row.mean_contrast_rank == sum_deck / static_cast<double>(count),
            "oracle contrast mean mismatch");
  }
}

void criterion_stubbornness_classification() {
  std::mt19937_64 rng(131);
  std::map<std::string, std::vector<bool>> outcomes;
  for (int f = 0; f < 600; ++f) {
    std::vector<bool> attempts(1 + rng() % 12);
    for (auto &&a : attempts) a = rng() % 3 != 0;
    outcomes["f" + std::to_string(f)] = attempts;
  }
  auto reports = classify_stubborn(outcomes);
  require(reports.size() == 600, "report count");
  for (const auto &r : reports) {
    const auto &attempts = outcomes.at(r.fact_id);
    std::size_t failures = 0;
    for (bool ok : attempts)
      if (!ok) ++failures;
    double frac = static_cast<double>(failures) / attempts.size();
    StubbornBucket expected = frac > 2.0 / 3.0   ? StubbornBucket::Gt67
                              : frac > 1.0 / 3.0 ? StubbornBucket::Gt33
                                                 : StubbornBucket::None;
    require(r.bucket == expected && r.failures == failures,
            "recount oracle disagrees for " + r.fact_id);
  }
}

void criterion_histogram_shift() {
  FixtureSet set = build_fixture_set(stubborn_facts(20, 0.516));
  OneHotEmbeddings emb(set.vocab.size());
  DecodeConfig config;
  config.stop_tokens = {set.eos};
  config.max_tokens = 4;

  EvalOptions ice_opts;
  ice_opts.mode = EvalMode::Ice;
  RunReport ice = evaluate(set.cases, *set.model, emb, config, ice_opts);
  EvalOptions deck_opts;
  RunReport deck_report = evaluate(set.cases, *set.model, emb, config, deck_opts);

  auto mean = [](const std::vector<double> &v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  double ice_mean = mean(ice.new_token_probs);
  double deck_mean = mean(deck_report.new_token_probs);
  require(deck_mean - ice_mean >= 0.2,
          "mean prob gain " + std::to_string(deck_mean - ice_mean) + " < 0.2");

  auto mass_above_half = [](const std::vector<double> &v) {
    Histogram h = probability_histogram(v, 10);
    std::size_t m = 0;
    for (std::size_t i = 5; i < h.counts.size(); ++i) m += h.counts[i];
    return m;
  };
  require(mass_above_half(deck_report.new_token_probs) >
              mass_above_half(ice.new_token_probs),
          "deck histogram mass above 0.5 not larger");
}

void criterion_parallel_determinism() {
  std::vector<FactFixture> facts = stubborn_facts(25, 0.516);
  std::mt19937_64 rng(137);
  std::size_t index = 100;
  for (int i = 0; i < 25; ++i)
    facts.push_back(ranked_fact(index++, 2 + rng() % 60));
  FixtureSet set = build_fixture_set(facts);
  require(set.cases.size() == 50, "fixture size");

  OneHotEmbeddings emb(set.vocab.size());
  DecodeConfig config;
  config.stop_tokens = {set.eos};
  config.max_tokens = 4;

  EvalOptions one;
  one.workers = 1;
  RunReport a = evaluate(set.cases, *set.model, emb, config, one);
  EvalOptions eight;
  eight.workers = 8;
  RunReport b = evaluate(set.cases, *set.model, emb, config, eight);

  require(a.accuracy == b.accuracy, "accuracy differs across worker counts");
  require(a.cases.size() == b.cases.size(), "case count differs");
  for (std::size_t i = 0; i < a.cases.size(); ++i) {
    require(a.cases[i].id == b.cases[i].id, "case order differs");
    require(a.cases[i].matched == b.cases[i].matched, "outcome differs");
    for (std::size_t q = 0; q < a.cases[i].questions.size(); ++q)
      require(a.cases[i].questions[q].generated ==
                  b.cases[i].questions[q].generated,
              "generated text differs");
  }
}

void criterion_protocol_conformance() {
  TableModel model(Vocab({"a", "b", "c"}), {},
                   LogitVector{{1.0, 2.0, 3.0}});

  { // handshake + well-formed query
    LogitServer server(model);
    int port = server.start();
    RemoteLogitSource remote(Vocab({"a", "b", "c"}), "127.0.0.1", port);
    require(remote.next_logits({0, 1}).values ==
                std::vector<double>{1.0, 2.0, 3.0},
            "round-trip logits wrong");
  }
  { // length mismatch
    LogitServer server(model, LogitServer::Fault::WrongLength);
    int port = server.start();
    RemoteLogitSource remote(Vocab({"a", "b", "c"}), "127.0.0.1", port);
    try {
      remote.next_logits({0});
      require(false, "wrong length not detected");
    } catch (const std::runtime_error &e) {
      require(std::string(e.what()) == "vocab mismatch",
              std::string("wrong error: ") + e.what());
    }
  }
  { // malformed JSON
    LogitServer server(model, LogitServer::Fault::MalformedJson);
    int port = server.start();
    RemoteLogitSource remote(Vocab({"a", "b", "c"}), "127.0.0.1", port);
    try {
      remote.next_logits({0});
      require(false, "malformed reply not detected");
    } catch (const std::runtime_error &e) {
      require(std::string(e.what()).find("protocol violation") == 0,
              std::string("wrong error: ") + e.what());
    }
  }
  { // timeout
    LogitServer server(model, LogitServer::Fault::NoReply);
    int port = server.start();
    RemoteLogitSource remote(Vocab({"a", "b", "c"}), "127.0.0.1", port, 200);
    try {
      remote.next_logits({0});
      require(false, "timeout not detected");
    } catch (const std::runtime_error &e) {
      require(std::string(e.what()).find("backend unavailable") == 0,
              std::string("wrong error: ") + e.what());
    }
  }
}

} // namespace

int main() {
  run_criterion(1, "degeneration equivalence over randomized fixtures",
                criterion_degeneration);
  run_criterion(2, "flip-inequality oracle over 1000 sampled triples",
                criterion_flip_inequality);
  run_criterion(3, "stubborn-case reproduction (0.516 gap, gamma=0.2)",
                criterion_stubborn_reproduction);
  run_criterion(4, "APC head invariants over 10000 random pairs",
                criterion_apc_invariants);
  run_criterion(5, "KED symmetry, bounds, and oracle agreement",
                criterion_ked_properties);
  run_criterion(6, "dual-sequence sync over a 1000-step generation",
                criterion_dual_sequence_sync);
  run_criterion(7, "rank-improvement mechanism across seeded buckets",
                criterion_rank_improvement);
  run_criterion(8, "stubbornness classification vs recount oracle",
                criterion_stubbornness_classification);
  run_criterion(9, "histogram shift of new-knowledge probability",
                criterion_histogram_shift);
  run_criterion(10, "determinism across worker counts",
                criterion_parallel_determinism);
  run_criterion(11, "logit-server protocol conformance",
                criterion_protocol_conformance);

  if (g_failures) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
