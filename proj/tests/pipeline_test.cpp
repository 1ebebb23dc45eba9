#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <sstream>
#include <string>

#include "eegkit/pipeline.hpp"

namespace {

namespace fs = std::filesystem;
using namespace eegkit;
using namespace eegkit::pipeline;
using nlohmann::json;

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("eegkit_pipeline_" + name);
  fs::remove_all(dir);
  return dir;
}

// Short recordings keep the suite fast; 30 s still gives 14 Welch segments.
json small_cohort() {
  return {{"n_asd", 8}, {"n_td", 9}, {"duration_s", 30}, {"baseline_s", 5}, {"channels", "homan"}};
}

json smoke_config() {
  return {{"seed", 11},
          {"synth", small_cohort()},
          {"stages", {"synth", "coherence", "features", "train"}},
          {"train", {{"classifiers", {"gnb"}}, {"cv", "loocv"}}}};
}

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(ParallelFor, VisitsEveryIndexAndRethrowsLowestFailure) {
  for (std::size_t jobs : {1u, 3u, 16u}) {
    std::vector<std::atomic<int>> hits(50);
    parallel_for(50, jobs, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
    try {
      parallel_for(20, jobs, [](std::size_t i) {
        if (i == 7 || i == 13) throw Error("boom " + std::to_string(i));
      });
      FAIL();
    } catch (const Error& e) {
      EXPECT_STREQ(e.what(), "boom 7");
    }
  }
}

TEST(Config, ParsesNestedSectionsAndDefaults) {
  const auto c = config_from_json(smoke_config());
  EXPECT_EQ(c.seed, 11u);
  ASSERT_TRUE(c.synth);
  EXPECT_EQ(c.synth->n_asd, 8u);
  EXPECT_EQ(c.synth->duration_s, 30.0);
  EXPECT_EQ(c.synth->channels, ElectrodeSet::homan().names);
  EXPECT_EQ(c.stages.size(), 4u);
  EXPECT_EQ(c.train.classifiers, std::vector<std::string>{"gnb"});
  EXPECT_EQ(c.bandpower.window_s, 5.0);
  EXPECT_EQ(c.bands, default_bands());
  EXPECT_EQ(c.electrode_set, "homan");
}

TEST(Config, RejectsUnknownKeysAndWrongTypes) {
  auto j = smoke_config();
  j["train"]["clasifiers"] = {"gnb"};
  try {
    config_from_json(j);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("train.clasifiers"), std::string::npos);
  }
  j = smoke_config();
  j["seed"] = "eleven";
  EXPECT_THROW(config_from_json(j), ConfigError);
  j = smoke_config();
  j["stages"] = {"synth", "nonsense"};
  EXPECT_THROW(config_from_json(j), ConfigError);
  j = smoke_config();
  j["epoch"] = {{"mode", "sideways"}};
  EXPECT_THROW(config_from_json(j), ConfigError);
}

TEST(Plan, OrdersStagesCanonically) {
  auto j = smoke_config();
  j["stages"] = {"train", "features", "coherence", "synth"};
  const auto plan = make_plan(config_from_json(j));
  EXPECT_EQ(plan.stages, (std::vector<Stage>{Stage::synth, Stage::coherence, Stage::features, Stage::train}));
  EXPECT_EQ(plan.sources, std::vector<std::string>{"coherence"});
}

TEST(Plan, TrainWithoutFeaturesIsADependencyError) {
  auto j = smoke_config();
  j["stages"] = {"synth", "coherence", "train"};
  const auto out = scratch("dependency");
  try {
    run(config_from_json(j), out);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("'train' requires stage 'features'"), std::string::npos);
  }
  EXPECT_FALSE(fs::exists(out));
}

TEST(Plan, StaticChecks) {
  auto bad = [](json j) { return [j] { make_plan(config_from_json(j)); }; };
  auto j = smoke_config();
  j["features"] = {{"sources", {"bandpower"}}};
  EXPECT_THROW(bad(j)(), ConfigError);  // bandpower stage not planned
  j = smoke_config();
  j["stages"] = {"coherence"};
  EXPECT_THROW(bad(j)(), ConfigError);  // no data source
  j = smoke_config();
  j["inputs"] = {"x.json"};
  EXPECT_THROW(bad(j)(), ConfigError);  // inputs and synth together
  j = smoke_config();
  j.erase("synth");
  j["stages"] = {"coherence"};
  j["inputs"] = {"/nonexistent/sub-01.json"};
  EXPECT_THROW(bad(j)(), ConfigError);
  j = smoke_config();
  j["train"]["classifiers"] = {"svm"};
  EXPECT_THROW(bad(j)(), ConfigError);
  j = smoke_config();
  j["electrode_set"] = "left";
  EXPECT_THROW(bad(j)(), ConfigError);
  j = smoke_config();
  j["stages"] = {"synth", "synth"};
  EXPECT_THROW(bad(j)(), ConfigError);
  j = smoke_config();
  j["synth"]["td"] = {{"right_lambda", 1.5}};
  EXPECT_THROW(bad(j)(), ConfigError);
}

TEST(Run, DryRunPrintsPlanWithoutTouchingData) {
  const auto out = scratch("dry");
  std::ostringstream log;
  const auto res = run(config_from_json(smoke_config()), out, {1, true, &log});
  EXPECT_FALSE(fs::exists(out));
  EXPECT_TRUE(res.summary.is_null());
  ASSERT_EQ(res.plan.size(), 4u);
  EXPECT_EQ(res.plan[0], "1. synth: 8 ASD + 9 TD subjects");
  EXPECT_EQ(res.plan[3], "4. train: loocv gnb");
  EXPECT_NE(log.str().find("plan (dry run):"), std::string::npos);
}

TEST(Run, SynthCoherenceFeaturesTrainEndToEnd) {
  const auto out = scratch("smoke");
  const auto res = run(config_from_json(smoke_config()), out);
  const auto& s = res.summary;
  EXPECT_EQ(s["status"], "ok");
  ASSERT_TRUE(s["results"]["train"]["gnb"].contains("accuracy"));
  const double acc = s["results"]["train"]["gnb"]["accuracy"];
  EXPECT_GE(acc, 0.0);
  EXPECT_LE(acc, 1.0);
  EXPECT_EQ(s["subjects"].size(), 17u);
  EXPECT_EQ(s["results"]["features"]["rows"], 17);
  EXPECT_EQ(s["results"]["features"]["columns"], 12);  // 2 hemisphere means + 2 x 5 bands

  const auto metrics = io::read_file(out / "train" / "metrics.csv");
  EXPECT_EQ(metrics.substr(0, metrics.find('\n')), "Classifier,Precision,Recall,F1,Accuracy");
  EXPECT_EQ(metrics.find("NaiveBayes,"), metrics.find('\n') + 1);

  // Every output is listed with a digest that matches its bytes; summary.json is on disk as returned.
  std::size_t on_disk = 0;
  for (const auto& f : fs::recursive_directory_iterator(out))
    if (f.is_regular_file() && f.path().filename() != "summary.json") ++on_disk;
  ASSERT_EQ(s["files"].size(), on_disk);
  for (const auto& f : s["files"]) {
    const auto content = io::read_file(out / f["path"].get<std::string>());
    EXPECT_EQ(f["sha256"], sha256_hex(content));
    EXPECT_EQ(f["bytes"], content.size());
  }
  EXPECT_EQ(json::parse(io::read_file(out / "summary.json")), s);
  EXPECT_TRUE(fs::exists(out / "recordings" / "sub-01.json"));
  EXPECT_TRUE(fs::exists(out / "coherence" / "summary.csv"));
  EXPECT_TRUE(fs::exists(out / "train" / "gnb.json"));
  fs::remove_all(out);
}

TEST(Run, IdenticalConfigAndSeedGiveIdenticalSummaries) {
  const auto a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
  const auto cfg = config_from_json(smoke_config());
  run(cfg, a, {1});
  run(cfg, b, {4});  // worker count must not matter
  EXPECT_EQ(io::read_file(a / "summary.json"), io::read_file(b / "summary.json"));
  auto other = cfg;
  other.seed = 12;
  run(other, c);
  EXPECT_NE(io::read_file(a / "summary.json"), io::read_file(c / "summary.json"));
  for (const auto& d : {a, b, c}) fs::remove_all(d);
}

TEST(Run, StageFailureKeepsPartialOutputsUnderFailed) {
  auto j = smoke_config();
  j["epoch"] = {{"name", "NOPE"}};
  const auto out = scratch("fail");
  try {
    run(config_from_json(j), out);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), Stage::coherence);
    EXPECT_NE(std::string(e.what()).find("unknown epoch 'NOPE'"), std::string::npos);
  }
  const auto note = io::read_file(out / "failed" / "error.txt");
  EXPECT_EQ(note.substr(0, note.find('\n')), "stage: coherence");
  EXPECT_TRUE(fs::exists(out / "failed" / "recordings" / "sub-01.json"));
  EXPECT_FALSE(fs::exists(out / "recordings"));
  EXPECT_FALSE(fs::exists(out / "summary.json"));

  // A later successful run into the same directory clears the failure.
  run(config_from_json(smoke_config()), out);
  EXPECT_FALSE(fs::exists(out / "failed"));
  EXPECT_TRUE(fs::exists(out / "summary.json"));
  fs::remove_all(out);
}

TEST(Run, ManifestInputsWithAllStagesButSynth) {
  const auto dir = scratch("inputs");
  synth::CohortSpec spec;
  spec.n_asd = 3;
  spec.n_td = 3;
  spec.duration_s = 40.0;
  spec.baseline_s = 10.0;
  const auto manifests = synth::write_cohort(synth::gen_cohort(spec), dir / "data");
  json j = {{"stages", {"preprocess", "bandpower", "wavelet", "coherence", "features", "train", "eval"}},
            {"wavelet", {{"scales", 20}, {"columns", 32}, {"electrodes", {"C3"}}}},
            {"features", {{"sources", {"bandpower", "coherence", "mean", "std", "entropy", "fft"}}}},
            {"train", {{"classifiers", {"gnb", "logistic", "knn"}}, {"cv", "kfold"}, {"folds", 3}, {"knn_k", 3}}},
            {"eval", {{"features", {"coh_right_theta"}}}}};
  for (const auto& m : manifests) j["inputs"].push_back(fs::relative(m, dir).generic_string());
  io::write_file_atomic(dir / "config.json", j.dump());
  const auto res = run(load_config(dir / "config.json"), dir / "run");
  const auto& r = res.summary["results"];
  // 10 electrodes x 5 bands for pow and fft, 12 coherence, 10 each for mean/std/entropy.
  EXPECT_EQ(r["features"]["columns"], 50 + 12 + 30 + 50);
  EXPECT_EQ(r["bandpower"]["windows"], 13);  // 30 s epoch: floor((7500 - 1250) / 500) + 1
  for (const auto* name : {"gnb", "logistic", "knn"}) EXPECT_TRUE(r["train"].contains(name)) << name;
  EXPECT_TRUE(r["eval"]["coefficients"].contains("coh_right_theta"));
  EXPECT_TRUE(fs::exists(dir / "run" / "preprocess" / "report.csv"));
  const auto pgm = io::read_file(dir / "run" / "wavelet" / "sub-01" / "C3.pgm");
  EXPECT_EQ(pgm.substr(0, 12), "P5\n32 20\n255");
  EXPECT_EQ(pgm.size(), 13u + 32u * 20u);
  fs::remove_all(dir);
}

TEST(Run, ElectrodeSetAllKeepsEveryChannel) {
  auto j = smoke_config();
  j["synth"]["channels"] = "montage32";
  j["electrode_set"] = "all";
  j["stages"] = {"synth", "features"};
  j["features"] = {{"sources", {"mean"}}};
  j.erase("train");
  const auto out = scratch("all");
  EXPECT_EQ(run(config_from_json(j), out).summary["results"]["features"]["columns"], 32);
  j["electrode_set"] = "homan";
  EXPECT_EQ(run(config_from_json(j), out).summary["results"]["features"]["columns"], 10);
  fs::remove_all(out);
}

}  // namespace
