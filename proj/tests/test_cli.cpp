// End-to-end tests of the command-line driver; every case shells out to the
// real binary and checks files and exit codes.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "adsrnote/io/container.hpp"
#include "adsrnote/io/note_io.hpp"
#include "adsrnote/io/wav.hpp"
#include "adsrnote/net.hpp"
#include "adsrnote/rng.hpp"
#include "adsrnote/targets.hpp"
#include "testutil.hpp"

using namespace adsrnote;
using adsrnote::testing::TempDir;

namespace {

int run_cli(const std::string& args, const std::string& log_prefix = "") {
  std::string cmd = std::string(ADSRNOTE_CLI_PATH) + " " + args;
  if (!log_prefix.empty()) {
    cmd += " >" + log_prefix + ".out 2>" + log_prefix + ".err";
  } else {
    cmd += " >/dev/null 2>&1";
  }
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<NoteEvent> demo_notes() {
  return {{0.20, 0.74, 38}, {0.30, 0.90, 45}, {1.10, 1.50, 38}, {1.22, 1.80, 52}};
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("simulate, decode, filter, eval compose to a perfect score") {
  TempDir dir;
  write_tsv_notes(dir.file("ref.tsv"), demo_notes());

  REQUIRE(run_cli("simulate " + dir.file("ref.tsv") + " " + dir.file("acts.adsr")) == 0);
  REQUIRE(run_cli("decode " + dir.file("acts.adsr") + " " + dir.file("segs.json")) == 0);
  REQUIRE(run_cli("filter " + dir.file("segs.json") + " " + dir.file("acts.adsr") +
                  " " + dir.file("est.tsv")) == 0);
  REQUIRE(run_cli("eval " + dir.file("ref.tsv") + " " + dir.file("est.tsv") + " " +
                  dir.file("report.json"), dir.file("eval")) == 0);

  const std::string report = slurp(dir.file("report.json"));
  CHECK(report.find("\"complete_notes\"") != std::string::npos);
  const std::string out = slurp(dir.file("eval.out"));
  CHECK(out.find("complete notes F 1") != std::string::npos);
}

TEST_CASE("decode of an all-zero activation file yields an empty note list") {
  TempDir dir;
  ActivationMatrix acts(40, 50.0);
  write_activations(dir.file("zero.adsr"), acts);
  REQUIRE(run_cli("decode " + dir.file("zero.adsr") + " " + dir.file("segs.json")) == 0);
  REQUIRE(run_cli("filter " + dir.file("segs.json") + " " + dir.file("zero.adsr") +
                  " " + dir.file("est.tsv")) == 0);
  CHECK(read_tsv_notes(dir.file("est.tsv")).empty());
}

TEST_CASE("eval of identical MIDI files reports unit F everywhere") {
  TempDir dir;
  write_midi_notes(dir.file("a.mid"), demo_notes());
  write_midi_notes(dir.file("b.mid"), demo_notes());
  REQUIRE(run_cli("eval " + dir.file("a.mid") + " " + dir.file("b.mid") + " " +
                  dir.file("r.json"), dir.file("eval")) == 0);
  const std::string out = slurp(dir.file("eval.out"));
  CHECK(out.find("frames F 1") != std::string::npos);
  CHECK(out.find("note onsets F 1") != std::string::npos);
  CHECK(out.find("complete notes F 1") != std::string::npos);
}

TEST_CASE("transcribe equals the four-stage composition byte for byte") {
  TempDir dir;
  // Untrained weights are fine: both routes must agree exactly anyway.
  save_weights(reference_architecture(99), dir.file("w.bin"));
  const AudioBuffer audio =
      testing::render_tones({{0.3, 0.9, 48}, {1.2, 1.7, 55}}, 2.2);
  write_wav(dir.file("p.wav"), audio);

  REQUIRE(run_cli("transcribe " + dir.file("w.bin") + " " + dir.file("p.wav") +
                  " " + dir.file("direct.mid")) == 0);

  REQUIRE(run_cli("features " + dir.file("p.wav") + " " + dir.file("feat.adsr")) == 0);
  REQUIRE(run_cli("infer " + dir.file("w.bin") + " " + dir.file("feat.adsr") + " " +
                  dir.file("acts.adsr")) == 0);
  REQUIRE(run_cli("decode " + dir.file("acts.adsr") + " " + dir.file("segs.json")) == 0);
  REQUIRE(run_cli("filter " + dir.file("segs.json") + " " + dir.file("acts.adsr") +
                  " " + dir.file("composed.mid")) == 0);

  const std::string direct = slurp(dir.file("direct.mid"));
  CHECK(!direct.empty());
  CHECK(direct == slurp(dir.file("composed.mid")));
}

TEST_CASE("infer accepts WAV input directly") {
  TempDir dir;
  save_weights(reference_architecture(5), dir.file("w.bin"));
  write_wav(dir.file("p.wav"), testing::render_tones({{0.2, 0.6, 40}}, 1.0));
  REQUIRE(run_cli("infer " + dir.file("w.bin") + " " + dir.file("p.wav") + " " +
                  dir.file("acts.adsr")) == 0);
  const ActivationMatrix acts = read_activations(dir.file("acts.adsr"));
  CHECK(acts.frames == 50);
}

TEST_CASE("malformed inputs exit nonzero with a diagnostic") {
  TempDir dir;
  std::ofstream bad(dir.file("bad.adsr"), std::ios::binary);
  bad << "this is not a container";
  bad.close();
  CHECK(run_cli("decode " + dir.file("bad.adsr") + " " + dir.file("segs.json"),
                dir.file("log")) == 1);
  const std::string err = slurp(dir.file("log.err"));
  CHECK(err.find("error") != std::string::npos);

  CHECK(run_cli("eval " + dir.file("missing.tsv") + " " + dir.file("missing.tsv") +
                " " + dir.file("r.json")) == 1);
}

TEST_CASE("hmm-template writes a config that decode accepts") {
  TempDir dir;
  REQUIRE(run_cli("hmm-template " + dir.file("hmm.json")) == 0);
  ActivationMatrix acts(20, 50.0);
  write_activations(dir.file("acts.adsr"), acts);
  CHECK(run_cli("decode --hmm " + dir.file("hmm.json") + " " + dir.file("acts.adsr") +
                " " + dir.file("segs.json")) == 0);
}

TEST_CASE("simulate honors --seed and --frames") {
  TempDir dir;
  write_tsv_notes(dir.file("ref.tsv"), demo_notes());
  REQUIRE(run_cli("--seed 7 simulate --sigma 0.05 --frames 120 " + dir.file("ref.tsv") +
                  " " + dir.file("a.adsr")) == 0);
  REQUIRE(run_cli("--seed 7 simulate --sigma 0.05 --frames 120 " + dir.file("ref.tsv") +
                  " " + dir.file("b.adsr")) == 0);
  REQUIRE(run_cli("--seed 8 simulate --sigma 0.05 --frames 120 " + dir.file("ref.tsv") +
                  " " + dir.file("c.adsr")) == 0);
  CHECK(slurp(dir.file("a.adsr")) == slurp(dir.file("b.adsr")));
  CHECK(slurp(dir.file("a.adsr")) != slurp(dir.file("c.adsr")));
  CHECK(read_activations(dir.file("a.adsr")).frames == 120);
}

TEST_CASE("config file fields apply and flags override them") {
  TempDir dir;
  std::ofstream cfg(dir.file("cfg.json"));
  cfg << R"({"filter": {"theta": 0.99}})";
  cfg.close();

  write_tsv_notes(dir.file("ref.tsv"), demo_notes());
  REQUIRE(run_cli("simulate " + dir.file("ref.tsv") + " " + dir.file("acts.adsr")) == 0);
  REQUIRE(run_cli("decode " + dir.file("acts.adsr") + " " + dir.file("segs.json")) == 0);

  // theta 0.99 discards the 0.95-peak segments; the flag brings them back.
  REQUIRE(run_cli("--config " + dir.file("cfg.json") + " filter " +
                  dir.file("segs.json") + " " + dir.file("acts.adsr") + " " +
                  dir.file("none.tsv")) == 0);
  CHECK(read_tsv_notes(dir.file("none.tsv")).empty());

  REQUIRE(run_cli("--config " + dir.file("cfg.json") + " filter --theta 0.5 " +
                  dir.file("segs.json") + " " + dir.file("acts.adsr") + " " +
                  dir.file("some.tsv")) == 0);
  CHECK(read_tsv_notes(dir.file("some.tsv")).size() == demo_notes().size());
}

TEST_CASE("eval pairs pieces across directories") {
  TempDir dir;
  std::filesystem::create_directories(dir.file("ref"));
  std::filesystem::create_directories(dir.file("est"));
  write_tsv_notes(dir.file("ref/p0.tsv"), {{0.1, 0.5, 10}});
  write_tsv_notes(dir.file("ref/p1.tsv"), {{0.2, 0.8, 20}});
  write_tsv_notes(dir.file("est/p0.tsv"), {{0.1, 0.5, 10}});
  write_tsv_notes(dir.file("est/p1.tsv"), {{0.9, 1.4, 20}});  // all wrong

  REQUIRE(run_cli("eval " + dir.file("ref") + " " + dir.file("est") + " " +
                  dir.file("r.json"), dir.file("eval")) == 0);
  const std::string out = slurp(dir.file("eval.out"));
  CHECK(out.find("pieces 2") != std::string::npos);
  CHECK(out.find("complete notes F 0.5") != std::string::npos);

  // A missing counterpart is an error.
  write_tsv_notes(dir.file("ref/p2.tsv"), {{0.1, 0.5, 30}});
  CHECK(run_cli("eval " + dir.file("ref") + " " + dir.file("est") + " " +
                dir.file("r.json")) == 1);
}

TEST_CASE("train-toy produces loadable weights on a small dataset") {
  TempDir dir;
  std::filesystem::create_directories(dir.file("data"));
  Rng rng(17);
  for (int piece = 0; piece < 3; ++piece) {
    const auto notes = testing::random_notes(rng, 4, 100, 50.0, 8, 4, 39, 8);
    const AudioBuffer audio = testing::render_tones(notes, 2.0);
    const std::string stem = dir.file("data/p" + std::to_string(piece));
    write_wav(stem + ".wav", audio);
    write_tsv_notes(stem + ".tsv", notes);
  }
  REQUIRE(run_cli("--seed 3 train-toy --epochs 1 --batch 8 " + dir.file("data") +
                  " " + dir.file("w.bin"), dir.file("train")) == 0);
  const NetworkParams net = load_weights(dir.file("w.bin"));
  CHECK(count_params(net) == 322192);
  const std::string out = slurp(dir.file("train.out"));
  CHECK(out.find("epoch 1/1") != std::string::npos);
}

TEST_SUITE_END();
