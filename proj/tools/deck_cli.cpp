// Copyright 2026 The DeCK Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line driver: dataset evaluation plus the analytics exports
// (knowledge-shift records, rank tables, stubbornness buckets, histograms).

#include "deck/evaluate.hpp"
#include "deck/remote.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>

namespace {

using namespace deck;

constexpr int kExitUsage = 1;
constexpr int kExitDataset = 2;
constexpr int kExitBackend = 3;

struct CliError : std::runtime_error {
  int code;
  CliError(int code, const std::string &message)
      : std::runtime_error(message), code(code) {}
};

bool is_backend_message(const std::string &message) {
  return message.rfind("backend unavailable", 0) == 0 ||
         message.rfind("vocab mismatch", 0) == 0 ||
         message.rfind("protocol violation", 0) == 0;
}

/// Stand-in source for a worker whose connection could not be opened;
/// every query reports the original failure as a per-case error outcome.
class UnavailableSource : public LogitSource {
public:
  UnavailableSource(Vocab vocab, std::string message)
      : vocab_(std::move(vocab)), message_(std::move(message)) {}
  const Vocab &vocab() const override { return vocab_; }
  LogitVector next_logits(const TokenSeq &) const override {
    throw std::runtime_error(message_);
  }

private:
  Vocab vocab_;
  std::string message_;
};

struct ModelOptions {
  std::string vocab_path;
  std::string model_spec;
};

void add_model_options(CLI::App &cmd, ModelOptions &opts) {
  cmd.add_option("--vocab", opts.vocab_path,
                 "vocabulary file, one token per line")
      ->required();
  cmd.add_option("--model", opts.model_spec,
                 "model spec: table:PATH | ngram:PATH | remote:HOST:PORT")
      ->required();
}

NGramModel load_ngram(const Vocab &vocab, const std::string &path) {
  std::ifstream in(path);
  if (!in) throw CliError(kExitDataset, "cannot open ngram model: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const std::exception &e) {
    throw CliError(kExitDataset, "ngram model parse error: " + std::string(e.what()));
  }
  std::size_t order = j.at("order").get<std::size_t>();
  double k = j.value("smoothing_k", 0.5);
  std::vector<TokenSeq> corpus;
  for (const auto &line : j.at("corpus"))
    corpus.push_back(tokenize(line.get<std::string>(), vocab));
  return train_ngram(vocab, corpus, order, k);
}

struct ModelHandle {
  Vocab vocab;
  SourceFactory factory;       // one source per worker
  std::shared_ptr<const LogitSource> shared; // single-threaded commands
};

ModelHandle open_model(const ModelOptions &opts) {
  Vocab vocab = [&] {
    try {
      return Vocab::load(opts.vocab_path);
    } catch (const std::exception &e) {
      throw CliError(kExitDataset, e.what());
    }
  }();

  auto split = opts.model_spec.find(':');
  if (split == std::string::npos)
    throw CliError(kExitUsage, "model spec must be table:PATH, ngram:PATH, "
                               "or remote:HOST:PORT");
  std::string kind = opts.model_spec.substr(0, split);
  std::string arg = opts.model_spec.substr(split + 1);

  ModelHandle handle{vocab, nullptr, nullptr};
  if (kind == "table") {
    std::shared_ptr<const LogitSource> model;
    try {
      model = std::make_shared<TableModel>(TableModel::load(vocab, arg));
    } catch (const std::exception &e) {
      throw CliError(kExitDataset, e.what());
    }
    handle.shared = model;
    handle.factory = [model] { return model; };
  } else if (kind == "ngram") {
    auto model = std::make_shared<NGramModel>(load_ngram(vocab, arg));
    handle.shared = model;
    handle.factory = [model] { return model; };
  } else if (kind == "remote") {
    auto [host, port] = [&] {
      try {
        return parse_endpoint(arg);
      } catch (const std::exception &e) {
        throw CliError(kExitUsage, e.what());
      }
    }();
    auto connect = [vocab, host, port]() -> std::shared_ptr<const LogitSource> {
      return std::make_shared<RemoteLogitSource>(vocab, host, port);
    };
    // Probe once so handshake failures surface before any work starts.
    try {
      handle.shared = connect();
    } catch (const std::exception &e) {
      throw CliError(kExitBackend, e.what());
    }
    // Workers get their own connections; a failed open degrades to
    // per-case error outcomes instead of aborting the run.
    handle.factory = [vocab, connect]() -> std::shared_ptr<const LogitSource> {
      try {
        return connect();
      } catch (const std::exception &e) {
        return std::make_shared<UnavailableSource>(vocab, e.what());
      }
    };
  } else {
    throw CliError(kExitUsage, "unknown model kind: " + kind);
  }
  return handle;
}

struct DecodeOptions {
  DecodeConfig config;
  std::vector<TokenId> stop_tokens;
};

void add_decode_options(CLI::App &cmd, DecodeOptions &opts) {
  auto &c = opts.config;
  cmd.add_option("--gamma", c.gamma, "contrasting coefficient")
      ->capture_default_str();
  cmd.add_option("--alpha-freq", c.alpha_freq, "frequency-weight scale")
      ->capture_default_str();
  cmd.add_option("--alpha-enh", c.alpha_enh, "logit coefficient")
      ->capture_default_str();
  cmd.add_option("--beta", c.beta, "relevance coefficient")
      ->capture_default_str();
  cmd.add_option("--lambda", c.lambda, "adaptive-head threshold")
      ->capture_default_str();
  cmd.add_option("--eps-freq", c.eps_freq, "frequency-weight log floor")
      ->capture_default_str();
  cmd.add_option("--eps-q", c.eps_q, "off-support target mass")
      ->capture_default_str();
  cmd.add_option("--max-tokens", c.max_tokens, "generation length cap")
      ->capture_default_str();
  cmd.add_option("--seed", c.seed, "sampling seed")->capture_default_str();
  cmd.add_option("--stop-token", opts.stop_tokens,
                 "token id(s) that terminate generation");
}

EvalMode parse_mode(const std::string &mode) {
  if (mode == "base") return EvalMode::Base;
  if (mode == "ice") return EvalMode::Ice;
  if (mode == "deck") return EvalMode::Deck;
  throw CliError(kExitUsage, "unknown mode: " + mode);
}

std::vector<EditCase> load_cases(const std::string &path) {
  try {
    return load_dataset(path);
  } catch (const std::exception &e) {
    throw CliError(kExitDataset, e.what());
  }
}

int dispatch(int argc, char **argv) {
  CLI::App app{"contrastive knowledge-editing decoder and evaluation harness"};
  app.require_subcommand(1);

  // --- run ---------------------------------------------------------------
  auto *run_cmd = app.add_subcommand("run", "evaluate a dataset");
  ModelOptions run_model;
  DecodeOptions run_decode;
  std::string run_dataset, run_mode = "deck", run_memory = "single",
              run_report;
  std::size_t run_workers = 1;
  add_model_options(*run_cmd, run_model);
  add_decode_options(*run_cmd, run_decode);
  run_cmd->add_option("--dataset", run_dataset, "JSONL dataset")->required();
  run_cmd->add_option("--mode", run_mode, "base | ice | deck")
      ->capture_default_str();
  run_cmd->add_option("--memory", run_memory, "single | full")
      ->capture_default_str();
  run_cmd->add_option("--workers", run_workers, "parallel workers")
      ->capture_default_str();
  run_cmd->add_option("--report", run_report, "write the JSON report here");

  // --- shift-stats -------------------------------------------------------
  auto *shift_cmd =
      app.add_subcommand("shift-stats", "pre/post-edit rank records");
  ModelOptions shift_model;
  std::string shift_dataset, shift_report;
  add_model_options(*shift_cmd, shift_model);
  shift_cmd->add_option("--dataset", shift_dataset, "JSONL dataset")
      ->required();
  shift_cmd->add_option("--report", shift_report, "write rank_records CSV here")
      ->required();

  // --- rank-table --------------------------------------------------------
  auto *rank_cmd = app.add_subcommand(
      "rank-table", "bucketed rank improvement between two run reports");
  std::string rank_ice, rank_deck, rank_out;
  rank_cmd->add_option("--ice-report", rank_ice, "baseline run report (JSON)")
      ->required();
  rank_cmd->add_option("--deck-report", rank_deck, "contrast run report (JSON)")
      ->required();
  rank_cmd->add_option("--out", rank_out, "CSV path (default: stdout)");

  // --- stubborn ----------------------------------------------------------
  auto *stubborn_cmd =
      app.add_subcommand("stubborn", "repeated-attempt failure buckets");
  ModelOptions stubborn_model;
  DecodeOptions stubborn_decode;
  std::string stubborn_dataset, stubborn_report, stubborn_mode = "ice";
  std::size_t stubborn_attempts = 3;
  add_model_options(*stubborn_cmd, stubborn_model);
  add_decode_options(*stubborn_cmd, stubborn_decode);
  stubborn_cmd->add_option("--dataset", stubborn_dataset, "JSONL dataset")
      ->required();
  stubborn_cmd->add_option("--mode", stubborn_mode, "base | ice | deck")
      ->capture_default_str();
  stubborn_cmd
      ->add_option("--attempts-per-fact", stubborn_attempts,
                   "question attempts per fact")
      ->capture_default_str();
  stubborn_cmd
      ->add_option("--report", stubborn_report, "write stubbornness CSV here")
      ->required();

  // --- histogram ---------------------------------------------------------
  auto *hist_cmd = app.add_subcommand(
      "histogram", "new-knowledge probability histogram from a run report");
  std::string hist_report, hist_out;
  std::size_t hist_bins = 10;
  hist_cmd->add_option("--report", hist_report, "run report (JSON)")->required();
  hist_cmd->add_option("--bins", hist_bins, "number of bins")
      ->capture_default_str();
  hist_cmd->add_option("--out", hist_out, "CSV path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (run_cmd->parsed()) {
    auto cases = load_cases(run_dataset);
    ModelHandle model = open_model(run_model);
    run_decode.config.stop_tokens.insert(run_decode.stop_tokens.begin(),
                                         run_decode.stop_tokens.end());
    OneHotEmbeddings embeddings(model.vocab.size());
    EvalOptions options;
    options.mode = parse_mode(run_mode);
    if (run_memory == "full") options.memory_mode = MemoryMode::Full;
    else if (run_memory != "single")
      throw CliError(kExitUsage, "unknown memory mode: " + run_memory);
    options.workers = run_workers;
    RunReport report = evaluate(cases, model.factory, embeddings,
                                run_decode.config, options);
    std::size_t errors = 0;
    for (const auto &c : report.cases)
      if (c.error) ++errors;
    std::printf("cases: %zu  accuracy: %.4f  errors: %zu\n",
                report.cases.size(), report.accuracy, errors);
    if (!run_report.empty()) write_report(report, run_report);
    return 0;
  }

  if (shift_cmd->parsed()) {
    auto cases = load_cases(shift_dataset);
    ModelHandle model = open_model(shift_model);
    EvalOptions options;
    auto records = shift_stats(cases, *model.shared, options);
    write_rank_records_csv(records, shift_report);
    std::printf("wrote %zu rank records to %s\n", records.size(),
                shift_report.c_str());
    return 0;
  }

  if (rank_cmd->parsed()) {
    RunReport ice, deck_report;
    try {
      ice = report_from_json_file(rank_ice);
      deck_report = report_from_json_file(rank_deck);
    } catch (const std::exception &e) {
      throw CliError(kExitDataset, e.what());
    }
    auto rows = rank_improvement(ice.rank_records, deck_report.rank_records);
    if (rank_out.empty()) {
      std::printf("bucket_lo,bucket_hi,count,mean_baseline_rank,"
                  "mean_contrast_rank,mean_improvement\n");
      for (const auto &r : rows)
        std::printf("%zu,%zu,%zu,%g,%g,%g\n", r.bucket.lo, r.bucket.hi,
                    r.count, r.mean_baseline_rank, r.mean_contrast_rank,
                    r.mean_improvement);
    } else {
      write_rank_table_csv(rows, rank_out);
    }
    return 0;
  }

  if (stubborn_cmd->parsed()) {
    auto cases = load_cases(stubborn_dataset);
    ModelHandle model = open_model(stubborn_model);
    stubborn_decode.config.stop_tokens.insert(
        stubborn_decode.stop_tokens.begin(), stubborn_decode.stop_tokens.end());
    OneHotEmbeddings embeddings(model.vocab.size());
    EvalOptions options;
    options.mode = parse_mode(stubborn_mode);
    auto reports = stubborn_run(cases, *model.shared, embeddings,
                                stubborn_decode.config, options,
                                stubborn_attempts);
    write_stubbornness_csv(reports, stubborn_report);
    std::printf("wrote %zu stubbornness rows to %s\n", reports.size(),
                stubborn_report.c_str());
    return 0;
  }

  // histogram
  RunReport report;
  try {
    report = report_from_json_file(hist_report);
  } catch (const std::exception &e) {
    throw CliError(kExitDataset, e.what());
  }
  Histogram hist = probability_histogram(report.new_token_probs, hist_bins);
  if (hist_out.empty()) {
    std::printf("bin_lo,bin_hi,count\n");
    for (std::size_t i = 0; i < hist.counts.size(); ++i)
      std::printf("%g,%g,%zu\n", hist.edges[i], hist.edges[i + 1],
                  hist.counts[i]);
  } else {
    write_histogram_csv(hist, hist_out);
  }
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  try {
    return dispatch(argc, argv);
  } catch (const CliError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_backend_message(e.what()) ? kExitBackend : kExitDataset;
  }
}
