#include "pan/cli.h"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "pan/checkpoint.h"
#include "pan/dataset.h"
#include "pan/diagnostics.h"
#include "pan/embeddings.h"
#include "pan/errors.h"
#include "pan/metrics.h"
#include "pan/params.h"
#include "pan/run_config.h"
#include "pan/training.h"

namespace pan {

namespace {

std::string real(double v, const char* fmt = "%.17g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

MetricsReport score(const ModelParams& params, const Dataset& data, const RunConfig& cfg) {
  const auto probs = predict_probabilities(params, data, cfg.training.batch_size);
  return evaluate_predictions(threshold(probs, kNumEmotions, cfg.training.threshold),
                              gold_matrix(data));
}

int cmd_train(const std::string& config_path, std::ostream& out) {
  const RunConfig cfg = load_run_config(config_path);
  check_inputs_exist(cfg);

  Dataset train_set = load_semeval_tsv(cfg.train_path);
  Dataset dev_set = load_semeval_tsv(cfg.dev_path);
  if (train_set.empty()) throw ParseError(cfg.train_path.string() + ": no training rows");
  if (dev_set.empty()) throw ParseError(cfg.dev_path.string() + ": no development rows");

  const Vocabulary vocab = build_vocabulary(tokenize_dataset(train_set), cfg.min_count);
  Tensor embedding;
  if (cfg.embeddings_path.empty()) {
    embedding = random_embeddings(vocab.size(), cfg.embed_dim, cfg.training.seed);
  } else {
    EmbeddingLoadReport report;
    embedding = load_embeddings(cfg.embeddings_path, vocab, cfg.embed_dim, cfg.training.seed, &report);
    out << "# embeddings: " << report.found << " of " << report.vocab_size
        << " vocabulary entries found (" << real(100.0 * report.coverage(), "%.1f") << "%)\n";
  }
  prepare_dataset(train_set, vocab, cfg.max_len);
  prepare_dataset(dev_set, vocab, cfg.max_len);

  const ModelParams init = init_params(embedding, cfg.hidden_size, cfg.training.seed);

  std::ofstream log_file;
  if (!cfg.log_path.empty()) {
    log_file.open(cfg.log_path, std::ios::trunc);
    if (!log_file) throw IoError("cannot write training log " + cfg.log_path.string());
  }
  out << "# epoch\ttrain_loss\tval_loss\tlr\telapsed_seconds\n";
  const auto result = train(train_set, dev_set, cfg.training, init, [&](const EpochRecord& r) {
    write_log_line(out, r);
    out.flush();
    if (log_file) write_log_line(log_file, r);
  });

  save_checkpoint({result.best, vocab, cfg, result.log.best_val_loss}, cfg.checkpoint_path);
  out << "best_epoch\t" << result.log.best_epoch << '\n'
      << "best_val_loss\t" << real(result.log.best_val_loss) << '\n'
      << "checkpoint\t" << cfg.checkpoint_path.string() << '\n'
      << format_summary(score(result.best, dev_set, cfg));
  if (!cfg.test_path.empty()) {
    Dataset test_set = load_semeval_tsv(cfg.test_path);
    if (!test_set.empty()) {
      prepare_dataset(test_set, vocab, cfg.max_len);
      out << "# test\n" << format_summary(score(result.best, test_set, cfg));
    }
  }
  return kExitOk;
}

int cmd_evaluate(const std::string& checkpoint_path, const std::string& data_path,
                 std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(checkpoint_path);
  Dataset data = load_semeval_tsv(data_path);
  prepare_dataset(data, ckpt.vocab, ckpt.config.max_len);
  const auto labels = emotion_labels();
  if (data.empty()) {
    const BinaryMatrix none(0, kNumEmotions);
    out << format_summary(evaluate_predictions(none, none)) << '\n'
        << per_class_report(none, none, labels);
    return kExitOk;
  }
  const auto& cfg = ckpt.config;
  const auto probs = predict_probabilities(ckpt.params, data, cfg.training.batch_size);
  const auto pred = threshold(probs, kNumEmotions, cfg.training.threshold);
  const auto gold = gold_matrix(data);
  const auto report = evaluate_predictions(pred, gold);
  const double loss = dataset_loss(ckpt.params, data, cfg.training.pos_weight, cfg.training.batch_size);
  out << "loss\t" << real(loss) << '\n'
      << format_summary(report) << '\n'
      << per_class_report(pred, gold, labels) << '\n'
      << per_class_tsv(report, labels);
  return kExitOk;
}

int cmd_predict(const std::string& checkpoint_path, const std::string& input_path,
                std::istream& in, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(checkpoint_path);
  std::ifstream file;
  if (!input_path.empty()) {
    file.open(input_path);
    if (!file) throw IoError("cannot open input file " + input_path);
  }
  std::istream& source = input_path.empty() ? in : file;

  Dataset data;
  std::string line;
  while (std::getline(source, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Example ex;
    ex.id = std::to_string(data.size() + 1);
    ex.text = line;
    data.examples.push_back(std::move(ex));
  }
  out << "text";
  for (auto name : kEmotionNames) out << '\t' << name;
  out << "\tlabels\n";
  if (data.empty()) return kExitOk;

  prepare_dataset(data, ckpt.vocab, ckpt.config.max_len);
  const auto probs = predict_probabilities(ckpt.params, data, ckpt.config.training.batch_size);
  const auto pred = threshold(probs, kNumEmotions, ckpt.config.training.threshold);
  for (std::size_t r = 0; r < data.size(); ++r) {
    out << data.examples[r].text;
    std::string labels;
    for (std::size_t c = 0; c < kNumEmotions; ++c) {
      out << '\t' << real(probs[r * kNumEmotions + c], "%.6f");
      if (pred.at(r, c)) {
        if (!labels.empty()) labels += ',';
        labels += kEmotionNames[c];
      }
    }
    out << '\t' << (labels.empty() ? "-" : labels) << '\n';
  }
  return kExitOk;
}

int cmd_gradcheck(std::uint64_t seed, std::ostream& out) {
  constexpr double kTolerance = 1e-4;
  const auto r = gradcheck_downsized(seed);
  out << "components\t" << r.components_checked << '\n'
      << "max_relative_error\t" << real(r.max_relative_error, "%.6e") << '\n'
      << "worst_parameter\t" << r.worst_parameter << '[' << r.worst_index << "]\n"
      << "analytic\t" << real(r.analytic, "%.12e") << '\n'
      << "numeric\t" << real(r.numeric, "%.12e") << '\n'
      << (r.max_relative_error < kTolerance ? "PASS" : "FAIL") << '\n';
  return r.max_relative_error < kTolerance ? kExitOk : kExitInternalError;
}

int cmd_selftest(std::uint64_t seed, std::ostream& out) {
  bool all = true;
  for (const auto& c : run_self_checks(seed)) {
    out << (c.passed ? "PASS" : "FAIL") << '\t' << c.name << '\t' << c.detail << '\n';
    all = all && c.passed;
  }
  return all ? kExitOk : kExitInternalError;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Pyramid attention network for multi-label emotion classification", "pan"};
  app.require_subcommand(1);

  std::string config_path, checkpoint_path, data_path, input_path;
  std::uint64_t seed = 7;

  auto* train_cmd = app.add_subcommand("train", "train a model and write the best checkpoint");
  train_cmd->add_option("--config", config_path, "key=value run configuration")->required();

  auto* eval_cmd = app.add_subcommand("evaluate", "score a checkpoint on a labelled TSV");
  eval_cmd->add_option("--checkpoint", checkpoint_path)->required();
  eval_cmd->add_option("--data", data_path, "E-c formatted TSV")->required();

  auto* predict_cmd = app.add_subcommand("predict", "score one tweet per input line");
  predict_cmd->add_option("--checkpoint", checkpoint_path)->required();
  predict_cmd->add_option("--input", input_path, "text file; standard input when omitted");

  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference check on a small model");
  grad_cmd->add_option("--seed", seed);

  auto* self_cmd = app.add_subcommand("selftest", "run the invariant suites");
  self_cmd->add_option("--seed", seed);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return kExitUserError;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(config_path, out);
    if (eval_cmd->parsed()) return cmd_evaluate(checkpoint_path, data_path, out);
    if (predict_cmd->parsed()) return cmd_predict(checkpoint_path, input_path, in, out);
    if (grad_cmd->parsed()) return cmd_gradcheck(seed, out);
    if (self_cmd->parsed()) return cmd_selftest(seed, out);
  } catch (const UserError& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return kExitUserError;
  } catch (const std::exception& e) {
    err << "internal error: " << one_line(e.what()) << '\n';
    return kExitInternalError;
  }
  return kExitInternalError;
}

}  // namespace pan
