// tests/cli_test.cc

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


#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "doctest.h"
#include "lde/binary_io.h"
#include "lde/checkpoint.h"
#include "lde/cli.h"
#include "lde/config.h"
#include "lde/error.h"
#include "lde/eval.h"
#include "lde/traindata.h"

namespace lde {

namespace {

namespace fs = std::filesystem;

// Fresh scratch directory per test case.
fs::path Scratch(const std::string &name) {
  const fs::path dir = fs::temp_directory_path() / "lde_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct Run {
  int code = -1;
  std::string out, err;
};

Run Cli(const std::vector<std::string> &args) {
  std::vector<std::string> full = {"ldelid"};
  full.insert(full.end(), args.begin(), args.end());
  std::ostringstream out, err;
  Run r;
  r.code = RunCli(full, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string Slurp(const fs::path &p) {
  const std::vector<char> bytes = io::ReadFile(p.string());
  return std::string(bytes.begin(), bytes.end());
}

void Spit(const fs::path &p, const std::string &text) {
  std::ofstream(p) << text;
}

// Small corpus and a two-epoch recipe; `extra` is appended verbatim.
std::string TinyConfig(const fs::path &dir, const std::string &extra = "") {
  return "[paths]\ndata_dir = " + (dir / "data").string() + "\nwork_dir = " +
         (dir / "exp").string() +
         "\n\n[data]\nnum_train = 32\nnum_test = 12\nnum_dev = 24\nmax_length = 300\n"
         "\n[train]\nepochs = 2\nmilestones =\ndivisors =\nbatch_size = 8\n"
         "crop_min = 50\ncrop_max = 120\n" +
         extra;
}

fs::path WriteTiny(const fs::path &dir, const std::string &name, const std::string &extra = "") {
  const fs::path p = dir / name;
  Spit(p, TinyConfig(dir, extra));
  return p;
}

std::vector<double> LossColumn(const std::string &log) {
  std::vector<double> losses;
  std::istringstream in(log);
  std::size_t step;
  double loss, smoothed;
  while (in >> step >> loss >> smoothed) losses.push_back(loss);
  return losses;
}

}  // namespace

TEST_CASE("config text round trips and defaults form the desk recipe") {
  const RunConfig def;
  CHECK(def.train.sgd.epochs == 30);
  CHECK(def.train.sgd.milestones == std::vector<std::size_t>{20, 27});
  CHECK(def.train.batch_size == 32);
  CHECK(def.train.crop.crop_min == 200);
  CHECK(def.train.crop.crop_max == 1000);
  CHECK(ParseRunConfig(FormatRunConfig(def), "echo") == def);

  RunConfig c = ParseRunConfig(
      "; comment\n[model]\npooling = tap\n[train]\nlr = 0.05\nmilestones = 3, 7\n"
      "divisors = 10,100\nepochs = 9\n[gmm]\nsdc = 5-2-3-4\nuse_sdc = true\n[data]\n"
      "feature_dim = 12\n",
      "inline");
  CHECK(c.model.pooling == PoolingKind::kTap);
  CHECK(c.train.sgd.lr == 0.05);
  CHECK(c.train.sgd.milestones == std::vector<std::size_t>{3, 7});
  CHECK(c.gmm.sdc_n == 5);
  CHECK(c.gmm.sdc_k == 4);
  CHECK(c.model.frontend.input_dim == 12);
  CHECK(ParseRunConfig(FormatRunConfig(c), "echo") == c);
}

TEST_CASE("config rejects unknown keys and malformed values") {
  CHECK_THROWS_AS(ParseRunConfig("[train]\nbogus = 1\n", "t"), ConfigError);
  CHECK_THROWS_AS(ParseRunConfig("[nosuch]\nlr = 1\n", "t"), ConfigError);
  CHECK_THROWS_AS(ParseRunConfig("lr = 1\n", "t"), ConfigError);
  CHECK_THROWS_AS(ParseRunConfig("[train]\nlr = fast\n", "t"), ConfigError);
  CHECK_THROWS_AS(ParseRunConfig("[train]\nepochs = -3\n", "t"), ConfigError);
  CHECK_THROWS_AS(ParseRunConfig("[train]\nlr = nan\n", "t"), ConfigError);
  CHECK_THROWS_AS(ParseRunConfig("[model]\nfreeze_centers = yes\n", "t"), ConfigError);
  CHECK_THROWS_AS(ParseRunConfig("[model]\npooling = max\n", "t"), ConfigError);
  CHECK_THROWS_AS(ParseRunConfig("[train]\nlr = 1\nlr = 2\n", "t"), ConfigError);
  CHECK_THROWS_AS(ParseRunConfig("[train]\nmilestones = 20,10\n", "t"), ConfigError);
  CHECK_THROWS_AS(ParseRunConfig("[gmm]\nsdc = 7-1-3\n", "t"), ConfigError);
  CHECK_THROWS_AS(ParseRunConfig("[paths]\ndata_dir =\n", "t"), ConfigError);
  CHECK_THROWS_AS(ReadRunConfig("/nonexistent/cfg.ini"), ConfigError);
}

TEST_CASE("shipped desk config equals the defaults") {
  CHECK(ReadRunConfig(LDE_SOURCE_DIR "/configs/desk.ini") == RunConfig());
}

TEST_CASE("gen-data is byte-reproducible, creates directories and refuses overwrite") {
  const fs::path dir = Scratch("gen");
  const fs::path cfg = WriteTiny(dir, "tiny.ini");
  const fs::path a = dir / "nested" / "a", b = dir / "b";
  REQUIRE(Cli({"gen-data", "-c", cfg.string(), "-o", a.string()}).code == kExitOk);
  REQUIRE(Cli({"gen-data", "-c", cfg.string(), "-o", b.string()}).code == kExitOk);
  for (const char *f : {"train.corpus", "test.corpus", "dev.corpus"}) {
    CHECK(fs::exists(a / f));
    CHECK(Slurp(a / f) == Slurp(b / f));
  }

  const Run again = Cli({"gen-data", "-c", cfg.string(), "-o", a.string()});
  CHECK(again.code == kExitUsage);
  CHECK(again.err.find("--force") != std::string::npos);
  CHECK(Cli({"gen-data", "-c", cfg.string(), "-o", a.string(), "--force"}).code == kExitOk);
}

TEST_CASE("gen-data with the default config reads back to the generated content") {
  const fs::path dir = Scratch("gen_default");
  const Run r = Cli({"gen-data", "-o", dir.string()});
  REQUIRE(r.code == kExitOk);
  const SyntheticCorpus ref = GenerateCorpus(SyntheticSpec{});
  const Corpus back = ReadCorpus((dir / "train.corpus").string());
  CHECK(back.utterances.size() == 800);
  CHECK(CorpusChecksum(back) == CorpusChecksum(ref.train));
  CHECK(CorpusChecksum(ReadCorpus((dir / "test.corpus").string())) ==
        CorpusChecksum(ref.test));
  CHECK(CorpusChecksum(ReadCorpus((dir / "dev.corpus").string())) == CorpusChecksum(ref.dev));
}

TEST_CASE("train and eval are byte-reproducible and eval reports buckets") {
  const fs::path dir = Scratch("repro");
  const fs::path cfg = WriteTiny(dir, "tiny.ini");
  REQUIRE(Cli({"gen-data", "-c", cfg.string()}).code == kExitOk);

  REQUIRE(Cli({"train", "-c", cfg.string()}).code == kExitOk);
  const std::string ckpt1 = Slurp(dir / "exp" / "model.ckpt");
  const std::string log1 = Slurp(dir / "exp" / "loss.tsv");
  REQUIRE(Cli({"train", "-c", cfg.string()}).code == kExitOk);
  CHECK(Slurp(dir / "exp" / "model.ckpt") == ckpt1);
  CHECK(Slurp(dir / "exp" / "loss.tsv") == log1);
  CHECK(LossColumn(log1).size() == 8);  // 2 epochs of 4 batches

  // The checkpoint carries the full configuration.
  const Checkpoint ck = LoadCheckpoint((dir / "exp" / "model.ckpt").string());
  CHECK(ParseRunConfig(ck.config_text, "echo") == ReadRunConfig(cfg.string()));
  CHECK(ck.epoch == 2);

  const std::string model = (dir / "exp" / "model.ckpt").string();
  const std::string test = (dir / "data" / "test.corpus").string();
  const Run e1 = Cli({"eval", "-m", model, "-d", test, "-s", (dir / "s1").string(), "--det",
                      (dir / "det.txt").string()});
  REQUIRE(e1.code == kExitOk);
  REQUIRE(Cli({"eval", "-m", model, "-d", test, "-s", (dir / "s2").string()}).code == kExitOk);
  CHECK(Slurp(dir / "s1") == Slurp(dir / "s2"));
  CHECK(ReadScores((dir / "s1").string()).trials.size() == 12);
  CHECK(e1.out.find("bucket short trials 4") != std::string::npos);
  CHECK(e1.out.find("bucket long cavg") != std::string::npos);
  CHECK(Slurp(dir / "det.txt").rfind("threshold\tp_miss\tp_fa\n", 0) == 0);
}

TEST_CASE("train with zero learning rate leaves the initial model") {
  const fs::path dir = Scratch("lr0");
  const fs::path cfg = WriteTiny(dir, "tiny.ini", "lr = 0\n");
  REQUIRE(Cli({"gen-data", "-c", cfg.string()}).code == kExitOk);
  REQUIRE(Cli({"train", "-c", cfg.string()}).code == kExitOk);
  Checkpoint ck = LoadCheckpoint((dir / "exp" / "model.ckpt").string());
  const RunConfig rc = ReadRunConfig(cfg.string());
  Model init = InitialModel(rc.model, rc.train.seed);
  auto got = ck.model.NamedParams();
  auto want = init.NamedParams();
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    CHECK(got[i].first == want[i].first);
    CHECK(got[i].second->value == want[i].second->value);
  }
}

TEST_CASE("tap and the frozen single zero-center dictionary train identically") {
  const fs::path dir = Scratch("reduction");
  const fs::path tap = WriteTiny(dir, "tap.ini", "\n[model]\npooling = tap\n");
  const fs::path lde = WriteTiny(
      dir, "lde.ini",
      "\n[model]\npooling = lde\nnum_components = 1\ncenter_init = zero\nfreeze_centers = "
      "true\naggregation = mean\nlength_normalize = false\n");
  REQUIRE(Cli({"gen-data", "-c", tap.string()}).code == kExitOk);
  REQUIRE(Cli({"train", "-c", tap.string(), "-l", (dir / "tap.tsv").string(), "-o",
               (dir / "tap.ckpt").string()})
              .code == kExitOk);
  REQUIRE(Cli({"train", "-c", lde.string(), "-l", (dir / "lde.tsv").string(), "-o",
               (dir / "lde.ckpt").string()})
              .code == kExitOk);
  const std::vector<double> a = LossColumn(Slurp(dir / "tap.tsv"));
  const std::vector<double> b = LossColumn(Slurp(dir / "lde.tsv"));
  REQUIRE(a.size() == b.size());
  REQUIRE(!a.empty());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-10);
}

TEST_CASE("fuse and gmm commands") {
  const fs::path dir = Scratch("fuse");
  const fs::path cfg = WriteTiny(dir, "tiny.ini");
  REQUIRE(Cli({"gen-data", "-c", cfg.string()}).code == kExitOk);
  REQUIRE(Cli({"train", "-c", cfg.string()}).code == kExitOk);
  const Run g = Cli({"gmm", "-c", cfg.string()});
  REQUIRE(g.code == kExitOk);
  CHECK(g.out.find("eer_avg") != std::string::npos);

  const std::string data = (dir / "data").string(), exp = (dir / "exp").string();
  for (const std::string split : {"dev", "test"}) {
    REQUIRE(Cli({"eval", "-m", exp + "/model.ckpt", "-d", data + "/" + split + ".corpus", "-s",
                 exp + "/lde." + split})
                .code == kExitOk);
    REQUIRE(Cli({"eval", "-m", exp + "/gmm.ckpt", "-d", data + "/" + split + ".corpus", "-s",
                 exp + "/gmm." + split})
                .code == kExitOk);
  }
  const Run f = Cli({"fuse", "--dev", exp + "/lde.dev," + exp + "/gmm.dev", "--test",
                     exp + "/lde.test," + exp + "/gmm.test", "-o", exp + "/fused", "-w",
                     exp + "/weights"});
  REQUIRE(f.code == kExitOk);
  CHECK(ReadScores(exp + "/fused").trials.size() == 12);
  CHECK(Slurp(exp + "/weights").rfind("weight\t0\t", 0) == 0);

  CHECK(Cli({"fuse", "--dev", exp + "/lde.dev", "--test", exp + "/lde.test," + exp + "/gmm.test",
             "-o", exp + "/x"})
            .code == kExitUsage);
  // Test files listing different trials are rejected.
  CHECK(Cli({"fuse", "--dev", exp + "/lde.dev," + exp + "/gmm.dev", "--test",
             exp + "/lde.test," + exp + "/gmm.dev", "-o", exp + "/x"})
            .code == kExitData);
}

TEST_CASE("exit codes for usage, data and numerical failures") {
  const fs::path dir = Scratch("codes");
  const fs::path cfg = WriteTiny(dir, "tiny.ini");
  CHECK(Cli({}).code == kExitUsage);
  CHECK(Cli({"train"}).code == kExitUsage);
  CHECK(Cli({"train", "-c", (dir / "missing.ini").string()}).code == kExitUsage);
  CHECK(Cli({"--help"}).code == kExitOk);

  // No corpus generated yet.
  CHECK(Cli({"train", "-c", cfg.string()}).code == kExitData);
  REQUIRE(Cli({"gen-data", "-c", cfg.string()}).code == kExitOk);

  const fs::path bad = WriteTiny(dir, "bad.ini", "bogus = 1\n");
  CHECK(Cli({"train", "-c", bad.string()}).code == kExitUsage);

  std::string wide_text = TinyConfig(dir);
  wide_text.replace(wide_text.find("[data]\n"), 7, "[data]\nfeature_dim = 21\n");
  const fs::path wide = dir / "wide.ini";
  Spit(wide, wide_text);
  CHECK(Cli({"train", "-c", wide.string()}).code == kExitData);

  const fs::path diverge = WriteTiny(dir, "div.ini", "lr = 1e200\n");
  const Run d = Cli({"train", "-c", diverge.string()});
  CHECK(d.code == kExitNumerical);
  CHECK(d.err.find("diverged") != std::string::npos);

  REQUIRE(Cli({"train", "-c", cfg.string()}).code == kExitOk);
  std::string bytes = Slurp(dir / "exp" / "model.ckpt");
  bytes[0] = 'X';
  Spit(dir / "corrupt.ckpt", bytes);
  const Run e = Cli({"eval", "-m", (dir / "corrupt.ckpt").string(), "-d",
                     (dir / "data" / "test.corpus").string(), "-s", (dir / "s").string()});
  CHECK(e.code == kExitData);
  CHECK(e.err.find("bad magic") != std::string::npos);
  CHECK(!fs::exists(dir / "s"));
}

TEST_CASE("the ldelid binary exits nonzero on a corrupted checkpoint") {
  const fs::path dir = Scratch("binary");
  Spit(dir / "corrupt.ckpt", "NOTACHECKPOINT");
  const fs::path cfg = WriteTiny(dir, "tiny.ini");
  const std::string bin = LDELID_PATH;
  REQUIRE(std::system((bin + " gen-data -c " + cfg.string() + " > /dev/null").c_str()) == 0);
  const int status = std::system((bin + " eval -m " + (dir / "corrupt.ckpt").string() + " -d " +
                                  (dir / "data" / "test.corpus").string() + " -s " +
                                  (dir / "s").string() + " 2> /dev/null")
                                     .c_str());
  REQUIRE(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == kExitData);
}

TEST_CASE("a trained model scores its own training split better than the test split") {
  const fs::path dir = Scratch("overfit");
  const fs::path p = dir / "cfg.ini";
  Spit(p, "[paths]\ndata_dir = " + (dir / "data").string() + "\nwork_dir = " +
              (dir / "exp").string() +
              "\n[data]\nnum_train = 48\nnum_test = 96\nnum_dev = 4\nmax_length = 400\n"
              "\n[train]\nepochs = 30\nmilestones = 20\ndivisors = 10\nbatch_size = 8\n"
              "crop_min = 100\ncrop_max = 300\n");
  REQUIRE(Cli({"gen-data", "-c", p.string()}).code == kExitOk);
  REQUIRE(Cli({"train", "-c", p.string()}).code == kExitOk);
  const std::string model = (dir / "exp" / "model.ckpt").string();
  for (const std::string split : {"train", "test"})
    REQUIRE(Cli({"eval", "-m", model, "-d", (dir / "data" / (split + ".corpus")).string(), "-s",
                 (dir / (split + ".scores")).string()})
                .code == kExitOk);
  const double train_eer = ComputeEer(ReadScores((dir / "train.scores").string())).averaged;
  const double test_eer = ComputeEer(ReadScores((dir / "test.scores").string())).averaged;
  MESSAGE("train EER " << train_eer << ", test EER " << test_eer);
  CHECK(train_eer < test_eer);
}

}  // namespace lde
