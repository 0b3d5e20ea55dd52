#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "deepchroma/cli.hpp"
#include "oracles.hpp"

using namespace deepchroma;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::size_t count_files(const fs::path& dir) {
  std::size_t n = 0;
  for ([[maybe_unused]] const auto& f : fs::directory_iterator(dir)) ++n;
  return n;
}

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

// One small corpus and extractor shared by the tests below.
class CliPipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new oracle::TempDir("dc_cli");
    const auto corpus = (dir() / "corpus").string();
    ASSERT_EQ(run({"synth", "--songs", "6", "--seconds", "6", "--seed", "3", "--out", corpus}).code, 0);
    ASSERT_EQ(run({"train-extractor", "--corpus", corpus, "--folds", "2", "--hidden", "16", "--max-epochs", "2",
                   "--out", (dir() / "model.dcx").string()})
                  .code,
              0);
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static const fs::path& dir() { return dir_->path(); }
  static oracle::TempDir* dir_;
};

oracle::TempDir* CliPipeline::dir_ = nullptr;

}  // namespace

TEST(ParseConfig, KeysAndValues) {
  const auto kv = cli::parse_config("# c\n\n; c\n--seed = 4\n  out=\"a b\"\r\nmajmin-only = true\n");
  ASSERT_EQ(kv.size(), 3u);
  EXPECT_EQ(kv[0], (std::pair<std::string, std::string>{"seed", "4"}));
  EXPECT_EQ(kv[1].second, "a b");
  EXPECT_EQ(kv[2].first, "majmin-only");
  EXPECT_THROW(cli::parse_config("seed 4\n"), UsageError);
  EXPECT_THROW(cli::parse_config(" = 4\n"), UsageError);
}

TEST(SaliencyLayout, UnfoldsRows) {
  RowMatrix flat(1, 3 * kBands);
  for (Eigen::Index j = 0; j < flat.cols(); ++j) flat(0, j) = static_cast<double>(j);
  const RowMatrix m = cli::saliency_layout(flat);
  ASSERT_EQ(m.rows(), 3);
  ASSERT_EQ(m.cols(), kBands);
  EXPECT_EQ(m(2, 5), static_cast<double>(2 * kBands + 5));
  const RowMatrix plain = RowMatrix::Ones(4, kBands);
  EXPECT_EQ(cli::saliency_layout(plain), plain);
  const RowMatrix odd = RowMatrix::Ones(1, kBands + 1);
  EXPECT_EQ(cli::saliency_layout(odd), odd);
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"synth"}).code, 1);
  EXPECT_EQ(run({"synth", "--songs", "-2", "--out", "x"}).code, 1);
  const auto r = run({"extract", "--wav", "a.wav", "--out", "b.dcf", "--feature", "mfcc"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("unknown feature"), std::string::npos);
  EXPECT_EQ(run({"synth", "--out", "x", "--config", "/nonexistent/cfg"}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, DataErrorsExitTwoWithoutOutputs) {
  oracle::TempDir dir("dc_cli_err");
  write_text(dir / "bad.wav", "RIFF nonsense");
  const auto out = dir / "x.dcf";
  const auto r = run({"spectrogram", "--wav", (dir / "bad.wav").string(), "--out", out.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
  EXPECT_FALSE(fs::exists(out));
  EXPECT_EQ(run({"render", "--in", (dir / "bad.wav").string(), "--out", (dir / "x.pgm").string()}).code, 2);
  EXPECT_FALSE(fs::exists(dir / "x.pgm"));
  EXPECT_EQ(run({"synth", "--songs", "2", "--arpeggio-fraction", "1.5", "--out", (dir / "c").string()}).code, 1);
  EXPECT_EQ(run({"synth", "--songs", "2", "--noise-amplitude", "-1", "--out", (dir / "c").string()}).code, 1);
  EXPECT_FALSE(fs::exists(dir / "c"));
  EXPECT_EQ(count_files(dir.path()), 1u);
}

TEST(Cli, SynthWritesFortyOneFiles) {
  oracle::TempDir dir("dc_cli_synth");
  const auto r = run({"synth", "--songs", "20", "--seconds", "2", "--seed", "7", "--out", (dir / "corpus").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_files(dir / "corpus"), 41u);
  EXPECT_TRUE(fs::exists(dir / "corpus" / "song19.lab"));
}

TEST(Cli, ConfigFileSuppliesDefaultsAndFlagsWin) {
  oracle::TempDir dir("dc_cli_cfg");
  write_text(dir / "run.cfg", "songs = 3\nseconds = 2\nseed = 5\n");
  const auto cfg = (dir / "run.cfg").string();
  ASSERT_EQ(run({"synth", "--config", cfg, "--out", (dir / "a").string()}).code, 0);
  EXPECT_EQ(count_files(dir / "a"), 7u);
  ASSERT_EQ(run({"synth", "--config", cfg, "--songs", "2", "--out", (dir / "b").string()}).code, 0);
  EXPECT_EQ(count_files(dir / "b"), 5u);
  // Same seed from the file gives the same audio.
  EXPECT_EQ(read_file_bytes(dir / "a" / "song00.wav"), read_file_bytes(dir / "b" / "song00.wav"));
  ASSERT_EQ(run({"synth", "--config", cfg, "--seed=6", "--songs", "2", "--out", (dir / "c").string()}).code, 0);
  EXPECT_NE(read_file_bytes(dir / "a" / "song00.wav"), read_file_bytes(dir / "c" / "song00.wav"));
  write_text(dir / "bad.cfg", "songs\n");
  EXPECT_EQ(run({"synth", "--config", (dir / "bad.cfg").string(), "--out", (dir / "d").string()}).code, 1);
  EXPECT_FALSE(fs::exists(dir / "d"));
}

TEST_F(CliPipeline, ExtractGivesTwelveDimensions) {
  const auto wav = (dir() / "corpus" / "song00.wav").string();
  const auto out = dir() / "song0.dcf";
  const auto r = run({"extract", "--model", (dir() / "model.dcx").string(), "--wav", wav, "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const FeatureFile f = load_dcf(out);
  EXPECT_EQ(f.data.cols(), 12);
  EXPECT_EQ(f.data.rows(), 60);
  EXPECT_FLOAT_EQ(f.fps, 10.0f);
  EXPECT_EQ(run({"extract", "--wav", wav, "--out", (dir() / "x.dcf").string()}).code, 1);
  for (const char* kind : {"c", "cwlog"}) {
    ASSERT_EQ(run({"extract", "--feature", kind, "--wav", wav, "--out", (dir() / "f.dcf").string()}).code, 0);
    EXPECT_EQ(load_dcf(dir() / "f.dcf").data.cols(), 12);
  }
  ASSERT_EQ(run({"extract", "--feature", "slog", "--wav", wav, "--out", (dir() / "f.dcf").string()}).code, 0);
  EXPECT_EQ(load_dcf(dir() / "f.dcf").data.cols(), kBands);
}

TEST_F(CliPipeline, RenderDimensions) {
  const auto wav = (dir() / "corpus" / "song01.wav").string();
  ASSERT_EQ(run({"extract", "--feature", "c", "--wav", wav, "--out", (dir() / "c.dcf").string()}).code, 0);
  const auto r = run({"render", "--in", (dir() / "c.dcf").string(), "--out", (dir() / "c.pgm").string()});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "60 x 12 pixels\n");
  const auto bytes = read_file_bytes(dir() / "c.pgm");
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 2), "P5");
}

TEST_F(CliPipeline, SaliencyRendersAsFramesByBands) {
  const auto model = (dir() / "model.dcx").string();
  const auto wav = (dir() / "corpus" / "song02.wav").string();
  const auto lab = (dir() / "corpus" / "song02.lab").string();
  const auto ann = cli::detail::load_lab(lab);
  const std::string chord = to_string(ann.segments.front().symbol);
  ASSERT_EQ(run({"saliency", "--model", model, "--wav", wav, "--lab", lab, "--chord", chord, "--out",
                 (dir() / "s.dcf").string(), "--profile-out", (dir() / "s.csv").string()})
                .code,
            0);
  const FeatureFile f = load_dcf(dir() / "s.dcf");
  EXPECT_EQ(f.data.rows(), 1);
  EXPECT_EQ(f.data.cols(), 15 * kBands);
  const auto r = run({"render", "--in", (dir() / "s.dcf").string(), "--out", (dir() / "s.ppm").string()});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "15 x 178 pixels\n");
  EXPECT_EQ(run({"saliency", "--model", model, "--wav", wav, "--chord", chord, "--out", (dir() / "t.dcf").string()}).code, 1);
  EXPECT_EQ(run({"saliency", "--model", model, "--wav", wav, "--frame", "9999", "--out", (dir() / "t.dcf").string()}).code, 1);
  EXPECT_FALSE(fs::exists(dir() / "t.dcf"));
}

TEST_F(CliPipeline, ClassifierAndTargets) {
  const auto corpus = (dir() / "corpus").string();
  ASSERT_EQ(run({"train-classifier", "--corpus", corpus, "--feature", "cwlog", "--folds", "2", "--out",
                 (dir() / "clf.dcx").string()})
                .code,
            0);
  const MLPModel clf = load_model(dir() / "clf.dcx");
  EXPECT_EQ(clf.output_dim(), 25);
  EXPECT_EQ(clf.input_dim(), 12 * context_frames_for(3.1));
  const auto r = run({"targets", "--lab", (dir() / "corpus" / "song00.lab").string(), "--wav",
                      (dir() / "corpus" / "song00.wav").string(), "--out", (dir() / "t.dcf").string(), "--labels-out",
                      (dir() / "t.dcl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(load_dcf(dir() / "t.dcf").data.rows(), 60);
  EXPECT_TRUE(fs::exists(dir() / "t.dcl"));
}

TEST_F(CliPipeline, SeededCommandsAreByteIdentical) {
  const auto corpus = (dir() / "corpus").string();
  const std::vector<std::string> train{"train-extractor", "--corpus", corpus, "--folds", "2", "--hidden", "16",
                                       "--max-epochs", "2", "--out"};
  auto again = train;
  again.push_back((dir() / "model2.dcx").string());
  ASSERT_EQ(run(again).code, 0);
  EXPECT_EQ(read_file_bytes(dir() / "model.dcx"), read_file_bytes(dir() / "model2.dcx"));
  for (const char* name : {"e1.csv", "e2.csv"})
    ASSERT_EQ(run({"evaluate", "--corpus", corpus, "--feature", "ideal", "--folds", "3", "--out", (dir() / name).string()}).code, 0);
  EXPECT_EQ(read_file_bytes(dir() / "e1.csv"), read_file_bytes(dir() / "e2.csv"));
}

TEST_F(CliPipeline, SweepAndReport) {
  const auto corpus = (dir() / "corpus").string();
  const auto r = run({"sweep-context", "--corpus", corpus, "--feature", "slog", "--contexts", "0.1,0.3", "--folds", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 3);
  EXPECT_EQ(r.out.rfind("feature,context_s,validation_wcsr,test_wcsr\nslog,0.1,", 0), 0u);
  EXPECT_EQ(run({"sweep-context", "--corpus", corpus, "--contexts", "0.1,x"}).code, 1);
  EXPECT_EQ(run({"sweep-context", "--corpus", corpus, "--contexts", "0,1"}).code, 1);

  for (const char* kind : {"ideal", "c"})
    ASSERT_EQ(run({"evaluate", "--corpus", corpus, "--feature", kind, "--folds", "2", "--out",
                   (dir() / (std::string(kind) + ".csv")).string()})
                  .code,
              0);
  const auto rep = run({"report", (dir() / "ideal.csv").string(), (dir() / "c.csv").string()});
  ASSERT_EQ(rep.code, 0) << rep.err;
  EXPECT_NE(rep.out.find("ideal"), std::string::npos);
  EXPECT_EQ(run({"report", (dir() / "ideal.csv").string()}).code, 1);
}
