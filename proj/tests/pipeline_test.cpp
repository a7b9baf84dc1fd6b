#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "impflow/io/dataset_io.hpp"
#include "impflow/io/pgm.hpp"
#include "impflow/pipeline/bundle.hpp"
#include "impflow/pipeline/commands.hpp"
#include "impflow/predictor/regressor.hpp"
#include "impflow/world/encoder.hpp"

using namespace impflow;
namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

ordered_json read_json(const fs::path& p) {
  return ordered_json::parse(slurp(p));
}

// One small end-to-end run shared by the checks below: a 60-face training
// world, a concentrated 40-face evaluation set, and a bundle with the
// trustworthiness regressor and mapper trained at smoke-test effort.
struct SmokeRun {
  fs::path root;
  fs::path data;
  fs::path eval_set;
  fs::path mismatch_set;
  fs::path bundle_dir;
  fs::path edited;
  fs::path report_a;
  fs::path report_b;
  fs::path mismatch_report;
  fs::path spectrum_prefix;
  fs::path merged;
  int rc_gen = -1, rc_gen_eval = -1, rc_gen_mismatch = -1;
  int rc_train_attr = -1, rc_train_mapper = -1;
  int rc_edit = -1, rc_eval_a = -1, rc_eval_b = -1, rc_eval_mismatch = -1;
  int rc_spectrum = -1, rc_report = -1;
};

std::string str(const fs::path& p) { return p.string(); }

SmokeRun run_smoke() {
  SmokeRun s;
  s.root = fs::temp_directory_path() / "impflow-pipeline-smoke";
  fs::remove_all(s.root);
  fs::create_directories(s.root);
  s.data = s.root / "data";
  s.eval_set = s.root / "eval";
  s.mismatch_set = s.root / "other-world";
  s.bundle_dir = s.root / "bundle";
  s.edited = s.root / "edited.pgm";
  s.report_a = s.root / "report_a.json";
  s.report_b = s.root / "report_b.json";
  s.mismatch_report = s.root / "report_mismatch.json";
  s.spectrum_prefix = s.root / "spectrum";
  s.merged = s.root / "merged.json";

  s.rc_gen = run_command({"gen-data", "--n", "60", "--seed", "7", "--out",
                          str(s.data)});
  s.rc_gen_eval =
      run_command({"gen-data", "--n", "40", "--seed", "8", "--covariate-scale",
                   "0.45", "--out", str(s.eval_set)});
  s.rc_gen_mismatch =
      run_command({"gen-data", "--n", "40", "--seed", "8", "--covariate-scale",
                   "0.45", "--mixing-seed", "99", "--out",
                   str(s.mismatch_set)});
  s.rc_train_attr =
      run_command({"train-attr", "--attr", "trustworthiness", "--data",
                   str(s.data), "--iters", "300", "--out", str(s.bundle_dir)});
  s.rc_train_mapper = run_command(
      {"train-mapper", "--attr", "trustworthiness", "--data", str(s.data),
       "--iters", "60", "--batch", "16", "--encoder-iters", "800",
       "--corrector-iters", "120", "--out", str(s.bundle_dir)});
  s.rc_edit = run_command({"edit", "--image",
                           str(s.data / "images" / "img00000.pgm"), "--attr",
                           "trustworthiness", "--delta", "0.0", "--bundle",
                           str(s.bundle_dir), "--out", str(s.edited)});
  std::vector<std::string> eval_args = {
      "eval",     "--set",    str(s.eval_set), "--deltas", "-0.1,0.1",
      "--bundle", str(s.bundle_dir)};
  std::vector<std::string> a = eval_args;
  a.insert(a.end(), {"--report", str(s.report_a)});
  s.rc_eval_a = run_command(a);
  std::vector<std::string> b = eval_args;
  b.insert(b.end(), {"--report", str(s.report_b)});
  s.rc_eval_b = run_command(b);
  s.rc_eval_mismatch =
      run_command({"eval", "--set", str(s.mismatch_set), "--deltas", "0.1",
                   "--bundle", str(s.bundle_dir), "--report",
                   str(s.mismatch_report)});
  s.rc_spectrum = run_command(
      {"spectrum", "--image", str(s.data / "images" / "img00001.pgm"),
       "--attr", "trustworthiness", "--range", "-0.2:0.2:0.1", "--bundle",
       str(s.bundle_dir), "--out", str(s.spectrum_prefix)});
  s.rc_report = run_command({"report", "--inputs",
                             str(s.report_a) + "," + str(s.mismatch_report),
                             "--out", str(s.merged)});
  return s;
}

const SmokeRun& smoke() {
  static const SmokeRun run = run_smoke();
  return run;
}

}  // namespace

TEST_CASE("usage errors exit with 2 and never touch the filesystem") {
  CHECK(run_command({}) == 2);
  CHECK(run_command({"frobnicate"}) == 2);
  CHECK(run_command({"gen-data"}) == 2);
  CHECK(run_command({"gen-data", "--n", "abc", "--out", "/tmp/x"}) == 2);
  CHECK(run_command({"--help"}) == 0);
  CHECK(run_command({"--version"}) == 0);
  fs::path dir = fs::temp_directory_path() / "impflow-pipeline-badcfg";
  fs::remove_all(dir);
  CHECK(run_command({"gen-data", "--n", "0", "--out", str(dir)}) == 2);
  CHECK(run_command({"train-attr", "--attr", "charisma", "--data", str(dir),
                     "--out", str(dir)}) == 2);
}

TEST_CASE("missing inputs surface as runtime failures") {
  fs::path nowhere = fs::temp_directory_path() / "impflow-no-such-dataset";
  fs::remove_all(nowhere);
  CHECK(run_command({"train-attr", "--attr", "trust", "--data", str(nowhere),
                     "--out", str(nowhere / "bundle")}) == 1);
  CHECK(run_command({"edit", "--image", str(nowhere / "x.pgm"), "--attr",
                     "trust", "--delta", "0.1", "--bundle", str(nowhere),
                     "--out", str(nowhere / "y.pgm")}) == 1);
}

TEST_CASE("dataset generation is reproducible byte for byte") {
  fs::path a = fs::temp_directory_path() / "impflow-gen-a";
  fs::path b = fs::temp_directory_path() / "impflow-gen-b";
  fs::remove_all(a);
  fs::remove_all(b);
  REQUIRE(run_command({"gen-data", "--n", "25", "--seed", "3", "--out",
                       str(a)}) == 0);
  REQUIRE(run_command({"gen-data", "--n", "25", "--seed", "3", "--out",
                       str(b)}) == 0);
  CHECK(slurp(a / "dataset.tsv") == slurp(b / "dataset.tsv"));
  CHECK(slurp(a / "world.cfg") == slurp(b / "world.cfg"));
  CHECK(slurp(a / "images" / "img00007.pgm") ==
        slurp(b / "images" / "img00007.pgm"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("smoke pipeline runs every stage cleanly") {
  const SmokeRun& s = smoke();
  CHECK(s.rc_gen == 0);
  CHECK(s.rc_gen_eval == 0);
  CHECK(s.rc_gen_mismatch == 0);
  CHECK(s.rc_train_attr == 0);
  CHECK(s.rc_train_mapper == 0);
  CHECK(s.rc_edit == 0);
  CHECK(s.rc_eval_a == 0);
  CHECK(s.rc_eval_b == 0);
  CHECK(s.rc_eval_mismatch == 0);
  CHECK(s.rc_spectrum == 0);
  CHECK(s.rc_report == 0);
}

TEST_CASE("zero-delta edit reproduces the plain reconstruction") {
  const SmokeRun& s = smoke();
  REQUIRE(s.rc_edit == 0);
  ModelBundle bundle = load_bundle(str(s.bundle_dir));
  ImageGrid original = read_pgm(str(s.data / "images" / "img00000.pgm"));
  ImageGrid expected = invert_with_restoration(
      bundle.encoder, encode(bundle.encoder, original), original,
      bundle.mixing);
  ImageGrid edited = read_pgm(str(s.edited));
  REQUIRE(edited.size() == expected.size());
  double gap = 0;
  for (int p = 0; p < edited.size(); ++p)
    gap = std::max(gap, std::abs(edited.pixels[p] - expected.pixels[p]));
  CHECK(gap < 0.02);
}

TEST_CASE("evaluation reports carry the full protocol output") {
  const SmokeRun& s = smoke();
  REQUIRE(s.rc_eval_a == 0);
  ordered_json j = read_json(s.report_a);
  for (const char* key : {"tool_version", "command", "run_config_hash",
                          "bundle", "dataset", "warnings", "reports"})
    CHECK(j.contains(key));
  CHECK(j["command"] == "eval");
  CHECK(j["warnings"].empty());
  REQUIRE(j["reports"].contains("trustworthiness"));
  const auto& r = j["reports"]["trustworthiness"];
  for (const char* key :
       {"attribute", "lambdas", "is", "pd", "fid", "adas", "pairs",
        "adas_per_lambda", "score_histogram"})
    CHECK(r.contains(key));
  CHECK(r["lambdas"].size() == 3);  // -0.1, 0, 0.1
  CHECK(r["pairs"].size() == 2);
  CHECK(r["is"].get<double>() > 0.0);
  CHECK(r["is"].get<double>() <= 1.0 + 1e-12);
  CHECK(r["fid"].get<double>() >= 0.0);
  CHECK(r["score_histogram"]["mass_mid"].get<double>() >= 0.0);
}

TEST_CASE("reruns of the same evaluation are byte-identical") {
  const SmokeRun& s = smoke();
  REQUIRE(s.rc_eval_a == 0);
  REQUIRE(s.rc_eval_b == 0);
  CHECK(slurp(s.report_a) == slurp(s.report_b));
}

TEST_CASE("world hash mismatches warn instead of failing") {
  const SmokeRun& s = smoke();
  REQUIRE(s.rc_eval_mismatch == 0);
  ordered_json j = read_json(s.mismatch_report);
  REQUIRE(j.contains("warnings"));
  REQUIRE(!j["warnings"].empty());
  std::string w = j["warnings"][0].get<std::string>();
  CHECK(w.find("hash mismatch") != std::string::npos);
}

TEST_CASE("spectrum command writes a montage and a sidecar") {
  const SmokeRun& s = smoke();
  REQUIRE(s.rc_spectrum == 0);
  ImageGrid montage = read_pgm(str(s.spectrum_prefix) + ".pgm");
  CHECK(montage.height == 32);
  CHECK(montage.width == 5 * 32 + 4);
  ordered_json j = read_json(fs::path(str(s.spectrum_prefix) + ".json"));
  for (const char* key :
       {"lambdas", "target_scores", "predicted_scores", "truth_scores",
        "identity_similarities", "clamped", "original_score", "attribute"})
    CHECK(j.contains(key));
  CHECK(j["lambdas"].size() == 5);
  CHECK(j["attribute"] == "trustworthiness");
  CHECK(j["lambdas"][2].get<double>() == 0.0);
}

TEST_CASE("report command merges evaluations and averages the metrics") {
  const SmokeRun& s = smoke();
  REQUIRE(s.rc_report == 0);
  ordered_json j = read_json(s.merged);
  REQUIRE(j.contains("summary"));
  REQUIRE(j["summary"].contains("trustworthiness"));
  const auto& sum = j["summary"]["trustworthiness"];
  for (const char* key : {"is", "pd", "fid", "adas"}) {
    REQUIRE(sum.contains(key));
  }
  CHECK(j.contains("inputs"));
  CHECK(run_command({"report", "--inputs", str(s.root / "nope.json"), "--out",
                     str(s.root / "merged2.json")}) == 1);
}

TEST_CASE("bundles reload to bit-identical behavior") {
  const SmokeRun& s = smoke();
  REQUIRE(s.rc_train_mapper == 0);
  ModelBundle one = load_bundle(str(s.bundle_dir));
  ModelBundle two = load_bundle(str(s.bundle_dir));
  LoadedDataset ds = load_dataset(str(s.eval_set));
  const RegressorModel& ra =
      one.regressors.at(AttributeKind::kTrustworthiness);
  const RegressorModel& rb =
      two.regressors.at(AttributeKind::kTrustworthiness);
  for (int i = 0; i < 10; ++i) {
    ImageGrid x = load_record_image(ds, i);
    CHECK(predict_score(ra, x) == predict_score(rb, x));
    Vec wa = encode(one.encoder, x);
    Vec wb = encode(two.encoder, x);
    CHECK((wa - wb).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("a truncated bundle file is reported as corrupt") {
  const SmokeRun& s = smoke();
  REQUIRE(s.rc_train_mapper == 0);
  fs::path corrupt = s.root / "bundle-corrupt";
  fs::remove_all(corrupt);
  fs::copy(s.bundle_dir, corrupt, fs::copy_options::recursive);
  fs::path victim = corrupt / "mixing.bin";
  auto size = fs::file_size(victim);
  fs::resize_file(victim, size / 2);
  CHECK_THROWS_AS(load_bundle(str(corrupt)), IoError);
  CHECK(run_command({"eval", "--set", str(s.eval_set), "--bundle",
                     str(corrupt), "--report",
                     str(s.root / "corrupt-report.json")}) == 1);
}
