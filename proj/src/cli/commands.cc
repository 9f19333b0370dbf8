// src/cli/commands.cc

// Copyright 2026  The ldelid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.


#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "lde/baseline.h"
#include "lde/binary_io.h"
#include "lde/checkpoint.h"
#include "lde/cli.h"
#include "lde/config.h"
#include "lde/error.h"
#include "lde/eval.h"
#include "lde/train.h"
#include "lde/traindata.h"

namespace lde {

namespace {

namespace fs = std::filesystem;

std::string Fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string Hex(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, v);
  return buf;
}

void RequireFile(const std::string &path) {
  if (!fs::is_regular_file(path)) throw FormatError("missing input file '" + path + "'");
}

// Creates the parent directory of an output file.
void PrepareOutput(const std::string &path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

RunConfig LoadConfig(const std::string &path) {
  return path.empty() ? RunConfig() : ReadRunConfig(path);
}

void CheckCorpusMatches(const Corpus &c, const RunConfig &cfg, const std::string &path) {
  if (c.num_classes != cfg.data.num_classes || c.feature_dim != cfg.data.feature_dim)
    throw FormatError("corpus '" + path + "' has " + std::to_string(c.num_classes) +
                      " classes of dim " + std::to_string(c.feature_dim) +
                      ", config expects " + std::to_string(cfg.data.num_classes) + " of dim " +
                      std::to_string(cfg.data.feature_dim));
}

TrialSet ScoreCorpus(const Checkpoint &ckpt, const Corpus &corpus) {
  if (corpus.num_classes != ckpt.NumClasses())
    throw FormatError("corpus has " + std::to_string(corpus.num_classes) +
                      " classes, checkpoint " + std::to_string(ckpt.NumClasses()));
  TrialSet ts;
  ts.class_names = DefaultClassNames(corpus.num_classes);
  ts.trials.reserve(corpus.utterances.size());
  for (const auto &u : corpus.utterances) ts.trials.push_back({u.id, u.label, ckpt.Scores(u.features)});
  return ts;
}

void ReportMetrics(std::ostream &out, const std::string &prefix, const TrialSet &ts) {
  out << prefix << "trials " << ts.trials.size() << "\n";
  try {
    const EerSummary eer = ComputeEer(ts);
    const CavgResult cavg = ComputeCavg(ts);
    out << prefix << "eer_avg " << Fixed(eer.averaged) << "\n";
    out << prefix << "eer_pooled " << Fixed(eer.pooled) << "\n";
    out << prefix << "cavg " << Fixed(cavg.cavg) << "\n";
    for (std::size_t k = 0; k < ts.NumClasses(); ++k)
      out << prefix << "eer " << ts.class_names[k] << " " << Fixed(eer.per_class[k]) << "\n";
  } catch (const ArgumentError &e) {
    out << prefix << "metrics unavailable: " << e.what() << "\n";
  }
}

// Overall metrics, then one block per duration bucket present in the corpus.
void ReportWithBuckets(std::ostream &out, const TrialSet &ts, const Corpus &corpus) {
  ReportMetrics(out, "", ts);
  for (Bucket b : {Bucket::kShort, Bucket::kMedium, Bucket::kLong}) {
    std::vector<std::string> ids;
    for (const auto &u : corpus.utterances)
      if (u.bucket == b) ids.push_back(u.id);
    if (ids.empty()) continue;
    ReportMetrics(out, "bucket " + BucketName(b) + " ", SelectTrials(ts, ids));
  }
}

// Pooled DET points: every trial's true-class score is a target, every other
// class score a non-target.
std::string FormatDet(const TrialSet &ts) {
  std::vector<double> tar, non;
  for (const auto &t : ts.trials)
    for (std::size_t k = 0; k < t.scores.size(); ++k) (k == t.label ? tar : non).push_back(t.scores[k]);
  std::string out = "threshold\tp_miss\tp_fa\n";
  char buf[96];
  for (const DetPoint &p : DetCurve(tar, non)) {
    std::snprintf(buf, sizeof(buf), "%.17g\t%.17g\t%.17g\n", p.threshold, p.p_miss, p.p_fa);
    out += buf;
  }
  return out;
}

void WriteText(const std::string &path, const std::string &text) {
  PrepareOutput(path);
  io::WriteFile(path, std::vector<char>(text.begin(), text.end()));
}

int GenData(const std::string &config_path, std::string out_dir, bool force, std::ostream &out) {
  const RunConfig cfg = LoadConfig(config_path);
  if (out_dir.empty()) out_dir = cfg.data_dir;
  const std::vector<std::pair<std::string, std::string>> files = {
      {"train", out_dir + "/train.corpus"},
      {"test", out_dir + "/test.corpus"},
      {"dev", out_dir + "/dev.corpus"}};
  if (!force)
    for (const auto &[name, path] : files)
      if (fs::exists(path))
        throw ArgumentError("'" + path + "' exists; pass --force to overwrite");
  fs::create_directories(out_dir);

  const SyntheticCorpus corpus = GenerateCorpus(cfg.data);
  const Corpus *parts[] = {&corpus.train, &corpus.test, &corpus.dev};
  for (std::size_t i = 0; i < files.size(); ++i) {
    WriteCorpus(files[i].second, *parts[i]);
    out << files[i].first << " " << files[i].second << " utterances "
        << parts[i]->utterances.size() << " checksum " << Hex(CorpusChecksum(*parts[i])) << "\n";
  }
  return kExitOk;
}

int Train(const std::string &config_path, std::string ckpt_path, std::string log_path,
          std::ostream &out) {
  const RunConfig cfg = LoadConfig(config_path);
  if (ckpt_path.empty()) ckpt_path = cfg.work_dir + "/model.ckpt";
  if (log_path.empty()) log_path = cfg.work_dir + "/loss.tsv";
  RequireFile(cfg.TrainCorpusPath());
  PrepareOutput(ckpt_path);
  PrepareOutput(log_path);

  const Corpus train = ReadCorpus(cfg.TrainCorpusPath());
  CheckCorpusMatches(train, cfg, cfg.TrainCorpusPath());
  spdlog::info("training {} on {} utterances for {} epochs", PoolingName(cfg.model.pooling),
               train.utterances.size(), cfg.train.sgd.epochs);
  TrainResult res = TrainModel(train, cfg.model, cfg.train,
                               [&](std::size_t epoch, double lr, double loss) {
                                 spdlog::info("epoch {}/{} lr {} loss {:.6f}", epoch + 1,
                                              cfg.train.sgd.epochs, lr, loss);
                               });

  Checkpoint ckpt;
  ckpt.kind = Checkpoint::Kind::kNeural;
  ckpt.config_text = FormatRunConfig(cfg);
  ckpt.model = std::move(res.model);
  ckpt.rng_key = res.data_rng.key();
  ckpt.rng_counter = res.data_rng.counter();
  ckpt.epoch = res.epochs_done;
  const std::vector<char> bytes = SerializeCheckpoint(ckpt);
  io::WriteFile(ckpt_path, bytes);
  WriteText(log_path, FormatLossLog(res.log));

  out << "checkpoint " << ckpt_path << " fnv " << Hex(io::Fnv1a(bytes)) << "\n";
  out << "loss_log " << log_path << " steps " << res.log.size() << "\n";
  if (!res.log.empty()) out << "final_smoothed_loss " << Fixed(res.log.back().smoothed) << "\n";
  return kExitOk;
}

int Eval(const std::string &ckpt_path, const std::string &corpus_path,
         const std::string &scores_path, const std::string &det_path, std::ostream &out) {
  RequireFile(ckpt_path);
  RequireFile(corpus_path);
  PrepareOutput(scores_path);
  if (!det_path.empty()) PrepareOutput(det_path);

  const Checkpoint ckpt = LoadCheckpoint(ckpt_path);
  const Corpus corpus = ReadCorpus(corpus_path);
  const TrialSet ts = ScoreCorpus(ckpt, corpus);
  WriteScores(scores_path, ts);
  if (!det_path.empty()) WriteText(det_path, FormatDet(ts));
  out << "scores " << scores_path << "\n";
  ReportWithBuckets(out, ts, corpus);
  return kExitOk;
}

int Fuse(const std::vector<std::string> &dev_paths, const std::vector<std::string> &test_paths,
         const std::string &out_path, const std::string &weights_path, std::ostream &out) {
  if (dev_paths.empty() || dev_paths.size() != test_paths.size())
    throw ArgumentError("fuse: give the same number (>= 1) of --dev and --test score files");
  for (const auto &p : dev_paths) RequireFile(p);
  for (const auto &p : test_paths) RequireFile(p);
  PrepareOutput(out_path);
  if (!weights_path.empty()) PrepareOutput(weights_path);

  std::vector<TrialSet> dev, test;
  for (const auto &p : dev_paths) dev.push_back(ReadScores(p));
  for (const auto &p : test_paths) test.push_back(ReadScores(p));
  const FusionResult fit = TrainFusion(dev);
  const TrialSet fused = Fuse(test, fit.weights);
  WriteScores(out_path, fused);

  char buf[64];
  std::string wtext;
  for (std::size_t s = 0; s < fit.weights.weights.size(); ++s) {
    std::snprintf(buf, sizeof(buf), "weight\t%zu\t%.17g\n", s, fit.weights.weights[s]);
    wtext += buf;
  }
  for (std::size_t k = 0; k < fit.weights.bias.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "bias\t%zu\t%.17g\n", k, fit.weights.bias[k]);
    wtext += buf;
  }
  if (!weights_path.empty()) WriteText(weights_path, wtext);

  out << "fused " << out_path << "\n";
  for (std::size_t s = 0; s < fit.weights.weights.size(); ++s)
    out << "weight " << test_paths[s] << " " << Fixed(fit.weights.weights[s]) << "\n";
  out << "dev_loss " << Fixed(fit.loss) << " iterations " << fit.iterations
      << (fit.converged ? "" : " (not converged)") << "\n";
  ReportMetrics(out, "", fused);
  return kExitOk;
}

int Gmm(const std::string &config_path, std::string ckpt_path, std::string scores_path,
        std::ostream &out) {
  const RunConfig cfg = LoadConfig(config_path);
  if (ckpt_path.empty()) ckpt_path = cfg.work_dir + "/gmm.ckpt";
  if (scores_path.empty()) scores_path = cfg.work_dir + "/gmm.test.scores";
  RequireFile(cfg.TrainCorpusPath());
  RequireFile(cfg.TestCorpusPath());
  PrepareOutput(ckpt_path);
  PrepareOutput(scores_path);

  const Corpus train = ReadCorpus(cfg.TrainCorpusPath());
  const Corpus test = ReadCorpus(cfg.TestCorpusPath());
  CheckCorpusMatches(train, cfg, cfg.TrainCorpusPath());
  CheckCorpusMatches(test, cfg, cfg.TestCorpusPath());
  spdlog::info("gmm baseline ({}) on {} utterances", GmmBackendName(cfg.gmm.backend),
               train.utterances.size());

  Checkpoint ckpt;
  ckpt.kind = Checkpoint::Kind::kGmm;
  ckpt.config_text = FormatRunConfig(cfg);
  ckpt.gmm = TrainGmmBaseline(train, cfg.gmm);
  const std::vector<char> bytes = SerializeCheckpoint(ckpt);
  io::WriteFile(ckpt_path, bytes);

  const TrialSet ts = ScoreCorpus(ckpt, test);
  WriteScores(scores_path, ts);
  out << "checkpoint " << ckpt_path << " fnv " << Hex(io::Fnv1a(bytes)) << "\n";
  out << "scores " << scores_path << "\n";
  ReportWithBuckets(out, ts, test);
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Dictionary-encoding language identification at desk scale"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  std::string config, out_dir, ckpt, log, corpus, scores, det, fused, weights;
  std::vector<std::string> dev, test;
  bool force = false;

  auto *gen = app.add_subcommand("gen-data", "Generate the synthetic train/test/dev corpus");
  gen->add_option("-c,--config", config, "Run configuration (defaults if omitted)");
  gen->add_option("-o,--out", out_dir, "Output directory (default: paths.data_dir)");
  gen->add_flag("-f,--force", force, "Overwrite existing corpus files");

  auto *train = app.add_subcommand("train", "Train a TAP or LDE network");
  train->add_option("-c,--config", config, "Run configuration")->required();
  train->add_option("-o,--out", ckpt, "Checkpoint path (default: work_dir/model.ckpt)");
  train->add_option("-l,--log", log, "Loss log path (default: work_dir/loss.tsv)");

  auto *eval = app.add_subcommand("eval", "Score a corpus with a checkpoint");
  eval->add_option("-m,--checkpoint", ckpt, "Checkpoint")->required();
  eval->add_option("-d,--corpus", corpus, "Corpus file")->required();
  eval->add_option("-s,--scores", scores, "Output scores file")->required();
  eval->add_option("--det", det, "Optional pooled DET point dump");

  auto *fuse = app.add_subcommand("fuse", "Fit fusion weights on dev scores, apply to test");
  fuse->add_option("--dev", dev, "Dev-split score files, one per system")
      ->required()
      ->delimiter(',');
  fuse->add_option("--test", test, "Test-split score files, same system order")
      ->required()
      ->delimiter(',');
  fuse->add_option("-o,--out", fused, "Fused test scores")->required();
  fuse->add_option("-w,--weights", weights, "Optional weights dump");

  auto *gmm = app.add_subcommand("gmm", "Train the GMM baseline and score the test split");
  gmm->add_option("-c,--config", config, "Run configuration")->required();
  gmm->add_option("-o,--out", ckpt, "Checkpoint path (default: work_dir/gmm.ckpt)");
  gmm->add_option("-s,--scores", scores, "Scores path (default: work_dir/gmm.test.scores)");

  std::vector<const char *> argv;
  for (const auto &a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (gen->parsed()) return GenData(config, out_dir, force, out);
    if (train->parsed()) return Train(config, ckpt, log, out);
    if (eval->parsed()) return Eval(ckpt, corpus, scores, det, out);
    if (fuse->parsed()) return Fuse(dev, test, fused, weights, out);
    if (gmm->parsed()) return Gmm(config, ckpt, scores, out);
  } catch (const NumericalError &e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const ConfigError &e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ArgumentError &e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error &e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace lde
