#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <filesystem>

#include "support.hpp"

using namespace textline;
using namespace testsupport;
namespace fs = std::filesystem;

namespace {

const std::string kCli = TEXTLINE_CLI;
const fs::path kFixtures = TEXTLINE_FIXTURES;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           ("textline_cli_" + std::string(info->name()) + "_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Exit status of the CLI; stderr is kept in err().
  int run(const std::string& args, const std::string& env = "") {
    std::string cmd = env + " \"" + kCli + "\" " + args + " >\"" + path("stdout.txt") + "\" 2>\"" +
                      path("stderr.txt") + "\"";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::string err() const { return read_text_file(path("stderr.txt")); }
  std::string out() const { return read_text_file(path("stdout.txt")); }

  std::size_t artifact_count() const {
    std::size_t n = 0;
    for (const auto& e : fs::recursive_directory_iterator(dir_)) {
      std::string name = e.path().filename().string();
      n += e.is_regular_file() && name != "stdout.txt" && name != "stderr.txt" && !name.starts_with("input");
    }
    return n;
  }

  fs::path dir_;
};

std::string slurp(const fs::path& p) { return read_text_file(p.string()); }

// Exhaustive minimum over labelings drawn from `pool`: enumerate active model
// subsets; within a subset every blob independently takes its cheapest label.
double subset_exhaustive_min(const std::vector<TextCandidate>& blobs, const ModelPool& pool, const EnergyParams& p) {
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << pool.size()); ++mask) {
    ModelPool active;
    std::set<Language> langs;
    for (std::size_t k = 0; k < pool.size(); ++k)
      if ((mask >> k) & 1U) active.push_back(pool[k]), langs.insert(pool[k].language);
    double e = p.line_cost * static_cast<double>(active.size()) + p.language_cost * static_cast<double>(langs.size());
    for (const auto& b : blobs) {
      double d = p.outlier_cost;
      for (const auto& m : active) d = std::min(d, model_data_term(b, m, p));
      e += d;
    }
    best = std::min(best, e);
  }
  return best;
}

}  // namespace

TEST_F(CliTest, FitEmptyBlobArray) {
  write_text_file(path("input.json"), "[]");
  ASSERT_EQ(run("fit " + path("input.json") + " -o " + path("empty")), 0) << err();
  EXPECT_EQ(slurp(path("empty.lines.json")), "[]\n");
  EXPECT_EQ(slurp(path("empty.labeling.json")), "{}\n");
  auto report = Json::parse(slurp(path("empty.report.json")));
  EXPECT_EQ(report["trace"], Json::parse("[0.0]"));
  EXPECT_EQ(report["inliers"], Json::object());
}

TEST_F(CliTest, GoldenFixtureReproducedAndNearExhaustive) {
  fs::path in = kFixtures / "golden6.json";
  ASSERT_EQ(run("fit " + in.string() + " -o " + path("g")), 0) << err();
  for (const char* suffix : {".lines.json", ".labeling.json", ".report.json"})
    EXPECT_EQ(slurp(path(std::string("g") + suffix)), slurp(kFixtures / (std::string("golden6") + suffix))) << suffix;

  EnergyParams p;
  auto blobs = blobs_from_json(read_json_file(in.string()));
  auto lines = models_from_json(read_json_file(path("g.lines.json")));
  auto labeling = labeling_from_json(read_json_file(path("g.labeling.json")), blobs);
  double e = total_energy(blobs, labeling, lines, p);
  EXPECT_NEAR(e, Json::parse(slurp(path("g.report.json")))["final_energy"].get<double>(), 1e-9);

  // Every pairwise hypothesis as the pool: refitting may only beat its optimum.
  ModelPool pairs;
  for (std::size_t i = 0; i < blobs.size(); ++i)
    for (std::size_t j = i + 1; j < blobs.size(); ++j)
      if (auto m = model_from_pair(blobs[i], blobs[j], p, static_cast<ModelId>(pairs.size()))) pairs.push_back(*m);
  EXPECT_LE(e, subset_exhaustive_min(blobs, pairs, p) + 1e-9);
  EXPECT_NEAR(e, exhaustive_min_energy(blobs, lines, p), 1e-9);
}

TEST_F(CliTest, PermutedBlobFileGivesSameLines) {
  Json arr = read_json_file((kFixtures / "golden6.json").string());
  Json rev = Json::array();
  for (auto it = arr.rbegin(); it != arr.rend(); ++it) rev.push_back(*it);
  write_text_file(path("input_a.json"), dump(arr));
  write_text_file(path("input_b.json"), dump(rev));
  ASSERT_EQ(run("fit " + path("input_a.json") + " -o " + path("a")), 0);
  ASSERT_EQ(run("fit " + path("input_b.json") + " -o " + path("b")), 0);
  EXPECT_EQ(slurp(path("a.lines.json")), slurp(path("b.lines.json")));
  EXPECT_EQ(slurp(path("a.labeling.json")), slurp(path("b.labeling.json")));
}

TEST_F(CliTest, FitSchemaViolationNamesFieldAndWritesNothing) {
  write_text_file(path("input.json"),
                  R"([{"id":0,"box":[0,0,5,5],"likelihoods":[1,0,0,0,0]},{"id":1,"box":[5,0,2,5],"likelihoods":[1,0,0,0,0]}])");
  EXPECT_EQ(run("fit " + path("input.json") + " -o " + path("bad")), 2);
  EXPECT_NE(err().find("blobs[1].box"), std::string::npos) << err();
  EXPECT_EQ(artifact_count(), 0u);
  EXPECT_EQ(run("fit " + path("missing.json") + " -o " + path("bad")), 2);
  write_text_file(path("input_trunc.json"), "[{\"id\": 0,");
  EXPECT_EQ(run("fit " + path("input_trunc.json") + " -o " + path("bad")), 2);
  EXPECT_EQ(artifact_count(), 0u);
}

TEST_F(CliTest, FitIsByteDeterministicWithSvg) {
  std::string in = (kFixtures / "korean_stack.json").string();
  ASSERT_EQ(run("fit " + in + " -o " + path("r1") + " --svg --seed 4"), 0);
  ASSERT_EQ(run("fit " + in + " -o " + path("r2") + " --svg --seed 4"), 0);
  for (const char* s : {".lines.json", ".labeling.json", ".report.json", ".svg"})
    EXPECT_EQ(slurp(path(std::string("r1") + s)), slurp(path(std::string("r2") + s))) << s;
  std::string svg = slurp(path("r1.svg"));
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  // One triplet (mean, base, centre) per line.
  auto lines = models_from_json(read_json_file(path("r1.lines.json")));
  std::size_t count = 0;
  for (std::size_t pos = 0; (pos = svg.find("<line ", pos)) != std::string::npos; ++pos) ++count;
  EXPECT_EQ(count, 3 * lines.size());
}

TEST_F(CliTest, ConfigLayering) {
  std::string in = (kFixtures / "golden6.json").string();
  write_text_file(path("input_cfg.json"), R"({"energy":{"line_cost":15,"max_iterations":4}})");
  ASSERT_EQ(run("fit " + in + " -o " + path("c") + " --max-iters 2", "TEXTLINE_MDL_CONFIG=" + path("input_cfg.json")), 0)
      << err();
  auto cfg = Json::parse(slurp(path("c.report.json")))["config"];
  EXPECT_EQ(cfg["energy"]["line_cost"], 15.0);
  EXPECT_EQ(cfg["energy"]["max_iterations"], 2);
  EXPECT_EQ(cfg["energy"]["outlier_cost"], 8.0);

  write_text_file(path("input_cfg2.json"), R"({"energy":{"line_cost":11}})");
  ASSERT_EQ(run("fit " + in + " -o " + path("d") + " --config " + path("input_cfg2.json"),
                "TEXTLINE_MDL_CONFIG=" + path("input_cfg.json")),
            0);
  EXPECT_EQ(Json::parse(slurp(path("d.report.json")))["config"]["energy"]["line_cost"], 11.0);

  write_text_file(path("input_bad.json"), R"({"energy":{"line_kost":1}})");
  EXPECT_EQ(run("fit " + in + " -o " + path("e") + " --config " + path("input_bad.json")), 2);
  EXPECT_NE(err().find("line_kost"), std::string::npos);
  EXPECT_EQ(run("fit " + in + " -o " + path("e") + " --max-iters -1"), 2);
  EXPECT_FALSE(fs::exists(path("e.lines.json")));
}

TEST_F(CliTest, FitDirectoryMatchesSingleFileRuns) {
  fs::create_directories(path("input_dir"));
  for (int s = 0; s < 4; ++s) {
    SceneSpec spec;
    std::mt19937_64 rng(static_cast<std::uint64_t>(s));
    write_text_file(path("input_dir/s" + std::to_string(s) + ".json"), dump(scene_to_json(generate_scene(spec, rng))));
  }
  ASSERT_EQ(run("fit " + path("input_dir") + " -o " + path("outdir")), 0) << err();
  for (int s = 0; s < 4; ++s) {
    std::string name = "s" + std::to_string(s);
    ASSERT_EQ(run("fit " + path("input_dir/" + name + ".json") + " -o " + path(name)), 0);
    EXPECT_EQ(slurp(path("outdir/" + name + ".lines.json")), slurp(path(name + ".lines.json")));
    EXPECT_EQ(slurp(path("outdir/" + name + ".labeling.json")), slurp(path(name + ".labeling.json")));
  }
}

TEST_F(CliTest, SynthDeterministicAndRoundTrips) {
  std::string spec = (kFixtures / "small_spec.json").string();
  ASSERT_EQ(run("synth " + spec + " -o " + path("a") + " --seed 9 --count 2 --render"), 0) << err();
  ASSERT_EQ(run("synth " + spec + " -o " + path("b") + " --seed 9 --count 2 --render"), 0);
  for (const char* f : {"scene_9.json", "scene_10.json", "scene_9.pgm"})
    EXPECT_EQ(slurp(path(std::string("a/") + f)), slurp(path(std::string("b/") + f))) << f;
  auto scene = scene_from_json(read_json_file(path("a/scene_9.json")));
  EXPECT_EQ(dump(scene_to_json(scene)), slurp(path("a/scene_9.json")));
  EXPECT_EQ(scene.gt_lines.size(), 2u);
  auto img = load_pgm(slurp(path("a/scene_9.pgm")));
  EXPECT_EQ(img.width, 480u);
  EXPECT_EQ(img.height, 320u);
}

TEST_F(CliTest, SynthErrors) {
  write_text_file(path("input_tiny.json"), R"({"image_size":[60,40]})");
  EXPECT_EQ(run("synth " + path("input_tiny.json") + " -o " + path("out")), 3);
  EXPECT_FALSE(fs::exists(path("out")));
  write_text_file(path("input_bad.json"), R"({"n_lines":0})");
  EXPECT_EQ(run("synth " + path("input_bad.json") + " -o " + path("out")), 2);
  EXPECT_EQ(run("synth " + path("nope.json") + " -o " + path("out")), 2);
}

TEST_F(CliTest, EvalIdentityEmptyAndMissingPair) {
  std::string spec = (kFixtures / "small_spec.json").string();
  ASSERT_EQ(run("synth " + spec + " -o " + path("gt") + " --seed 1 --count 3"), 0);
  fs::create_directories(path("ident"));
  fs::create_directories(path("empty"));
  for (int s = 1; s <= 3; ++s) {
    std::string name = "scene_" + std::to_string(s);
    auto scene = scene_from_json(read_json_file(path("gt/" + name + ".json")));
    write_text_file(path("ident/" + name + ".lines.json"), dump(models_to_json(scene.gt_lines)));
    write_text_file(path("ident/" + name + ".labeling.json"), dump(labeling_to_json(scene.gt_labeling, scene.blobs)));
    write_text_file(path("empty/" + name + ".lines.json"), "[]");
    write_text_file(path("empty/" + name + ".labeling.json"),
                    dump(labeling_to_json(Labeling(scene.blobs.size()), scene.blobs)));
  }
  ASSERT_EQ(run("eval " + path("ident") + " " + path("gt") + " -o " + path("m_ident")), 0) << err();
  auto m = Json::parse(slurp(path("m_ident.metrics.json")));
  EXPECT_EQ(m["aggregate"]["mean_f"], 1.0);
  EXPECT_EQ(m["scenes"].size(), 3u);
  std::string csv = slurp(path("m_ident.metrics.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "scene,n_detected,n_truth,matched,precision,recall,f");
  EXPECT_NE(csv.find("scene_1,2,2,2,1.000000,1.000000,1.000000"), std::string::npos) << csv;

  ASSERT_EQ(run("eval " + path("empty") + " " + path("gt") + " -o " + path("m_empty")), 0);
  auto e = Json::parse(slurp(path("m_empty.metrics.json")));
  EXPECT_EQ(e["aggregate"]["mean_recall"], 0.0);
  EXPECT_EQ(e["aggregate"]["mean_precision"], 1.0);

  fs::remove(path("ident/scene_2.lines.json"));
  EXPECT_EQ(run("eval " + path("ident") + " " + path("gt") + " -o " + path("m_missing")), 2);
  EXPECT_NE(err().find("scene_2"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("m_missing.metrics.json")));
}

TEST_F(CliTest, EvalMatchesLibraryArithmetic) {
  std::string spec = (kFixtures / "small_spec.json").string();
  ASSERT_EQ(run("synth " + spec + " -o " + path("gt") + " --seed 5 --count 2"), 0);
  ASSERT_EQ(run("fit " + path("gt") + " -o " + path("det")), 0);
  ASSERT_EQ(run("eval " + path("det") + " " + path("gt") + " -o " + path("m") + " --overlap-min 0.6"), 0) << err();
  auto report = Json::parse(slurp(path("m.metrics.json")));
  EXPECT_EQ(report["config"]["eval"]["overlap_min"], 0.6);
  for (int s = 5; s <= 6; ++s) {
    std::string name = "scene_" + std::to_string(s);
    auto scene = scene_from_json(read_json_file(path("gt/" + name + ".json")));
    auto lines = models_from_json(read_json_file(path("det/" + name + ".lines.json")));
    auto labeling = labeling_from_json(read_json_file(path("det/" + name + ".labeling.json")), scene.blobs);
    auto expect = evaluate_lines(lines, labeling, scene.gt_lines, scene.gt_labeling, 0.6);
    const Json& row = report["scenes"][static_cast<std::size_t>(s - 5)];
    EXPECT_EQ(row["scene"], name);
    EXPECT_DOUBLE_EQ(row["f"].get<double>(), expect.f);
    EXPECT_EQ(row["matches"].size(), expect.matches.size());
  }
}

TEST_F(CliTest, TrainThenDetect) {
  std::mt19937_64 rng(3);
  auto samples = separable_fixture(rng, 6);
  std::string manifest = "pgm_path,left,top,right,bottom,category\n";
  for (std::size_t k = 0; k < samples.size(); ++k) {
    std::string name = "input_p" + std::to_string(k) + ".pgm";
    write_text_file(path(name), save_pgm(samples[k].image));
    const Box& b = samples[k].box;
    manifest += name + "," + std::to_string(int(b.left)) + "," + std::to_string(int(b.top)) + "," +
                std::to_string(int(b.right)) + "," + std::to_string(int(b.bottom)) + "," +
                std::string(to_string(samples[k].category)) + "\n";
  }
  write_text_file(path("input_manifest.csv"), manifest);
  ASSERT_EQ(run("train " + path("input_manifest.csv") + " -o " + path("m1.json") + " --rounds 20 --depth 2 --seed 1"), 0)
      << err();
  ASSERT_EQ(run("train " + path("input_manifest.csv") + " -o " + path("m2.json") + " --rounds 20 --depth 2 --seed 1"), 0);
  EXPECT_EQ(slurp(path("m1.json")), slurp(path("m2.json")));
  EXPECT_NE(out().find("training accuracy 1.00"), std::string::npos) << out();

  // Blank image: no candidates, no lines, valid outputs.
  write_text_file(path("input_blank.pgm"), save_pgm(GrayImage(64, 48, 200)));
  ASSERT_EQ(run("detect " + path("input_blank.pgm") + " --model " + path("m1.json") + " -o " + path("blank") + " --svg"), 0)
      << err();
  EXPECT_EQ(slurp(path("blank.lines.json")), "[]\n");
  EXPECT_EQ(slurp(path("blank.blobs.json")), "[]\n");
  EXPECT_TRUE(fs::exists(path("blank.svg")));

  // A rendered scene goes through the whole chain deterministically.
  ASSERT_EQ(run("synth " + (kFixtures / "small_spec.json").string() + " -o " + path("sc") + " --seed 2 --render"), 0);
  ASSERT_EQ(run("detect " + path("sc/scene_2.pgm") + " --model " + path("m1.json") + " -o " + path("d1")), 0) << err();
  ASSERT_EQ(run("detect " + path("sc/scene_2.pgm") + " --model " + path("m1.json") + " -o " + path("d2")), 0);
  for (const char* s : {".lines.json", ".labeling.json", ".report.json", ".blobs.json"})
    EXPECT_EQ(slurp(path(std::string("d1") + s)), slurp(path(std::string("d2") + s))) << s;
  for (const auto& b : blobs_from_json(read_json_file(path("d1.blobs.json")))) {
    double sum = 0;
    for (double v : b.likelihoods) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }

  // Single category, bad rows, unreadable images.
  write_text_file(path("input_one.csv"), "input_p0.pgm,4,4,10,20,English\ninput_p5.pgm,4,4,10,20,English\n");
  EXPECT_EQ(run("train " + path("input_one.csv") + " -o " + path("m3.json")), 2);
  write_text_file(path("input_badcat.csv"), "input_p0.pgm,4,4,10,20,Klingon\n");
  EXPECT_EQ(run("train " + path("input_badcat.csv") + " -o " + path("m3.json")), 2);
  EXPECT_FALSE(fs::exists(path("m3.json")));
  write_text_file(path("input_junk.pgm"), "P2 not binary");
  EXPECT_EQ(run("detect " + path("input_junk.pgm") + " --model " + path("m1.json") + " -o " + path("j")), 2);
  EXPECT_EQ(run("detect " + path("nope.pgm") + " --model " + path("m1.json") + " -o " + path("j")), 2);
  EXPECT_FALSE(fs::exists(path("j.lines.json")));
}

TEST_F(CliTest, DetectWithOracleStubRecoversLines) {
  std::string spec = (kFixtures / "small_spec.json").string();
  ASSERT_EQ(run("synth " + spec + " -o " + path("gt") + " --seed 20 --count 6 --render"), 0);
  fs::create_directories(path("imgs"));
  for (int s = 20; s < 26; ++s) {
    std::string name = "scene_" + std::to_string(s);
    fs::rename(path("gt/" + name + ".pgm"), path("imgs/" + name + ".pgm"));
  }
  ASSERT_EQ(run("detect " + path("imgs") + " --oracle-scene " + path("gt") + " -o " + path("det")), 0) << err();
  ASSERT_EQ(run("eval " + path("det") + " " + path("gt") + " -o " + path("m")), 0) << err();
  auto agg = Json::parse(slurp(path("m.metrics.json")))["aggregate"];
  EXPECT_GE(agg["mean_f"].get<double>(), 0.85) << dump(agg);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("fit"), 2);
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("detect x.pgm -o y"), 2);
}
