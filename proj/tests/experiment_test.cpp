#include <gtest/gtest.h>

#include <fstream>

#include "negoforge/digest.hpp"
#include "negoforge/errors.hpp"
#include "negoforge/experiment.hpp"
#include "negoforge/json_io.hpp"
#include "support.hpp"

using namespace negoforge;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny(const fs::path& out) {
  ExperimentConfig c;
  c.seed = 5;
  c.out = out;
  c.train_problems = 2;
  c.test_problems = 1;
  c.generator.max_issues = 3;
  c.generator.max_values = 4;
  c.max_rounds = 20;
  c.feature_sessions = 4;
  c.smbo_budget = 12;
  c.smbo_intensify_budget = 4;
  c.surrogate_trees = 5;
  c.hydra_k = 2;
  c.hydra_repetitions = 1;
  c.selector_folds = 2;
  c.tournament_repetitions = 1;
  return c;
}

std::string digest_tree(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::string all;
  for (const auto& f : files) all += fs::relative(f, dir).string() + ":" + sha256_hex(read_text_file(f)) + "\n";
  return all;
}

bool all_passed(const std::vector<CheckResult>& checks) {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

}  // namespace

TEST(ExperimentConfig, DefaultsAndOverrides) {
  const auto c = experiment_config_from_json(Json::parse(R"({"seed": 9, "smbo": {"budget": 50}, "hydra": {"k": 2}})"));
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.smbo_budget, 50u);
  EXPECT_EQ(c.hydra_k, 2u);
  EXPECT_EQ(c.max_rounds, ExperimentConfig{}.max_rounds);
  const auto back = experiment_config_from_json(to_json(c));
  EXPECT_EQ(dump_stable(to_json(back)), dump_stable(to_json(c)));
}

TEST(ExperimentConfig, RejectsUnknownFieldsAndBadTypes) {
  try {
    experiment_config_from_json(Json::parse(R"({"smbo": {"budgett": 5}})"), "cfg.json");
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("cfg.json.smbo.budgett"), std::string::npos) << e.what();
  }
  EXPECT_THROW(experiment_config_from_json(Json::parse(R"({"seed": "one"})")), SchemaError);
  EXPECT_THROW(experiment_config_from_json(Json::parse(R"({"tournament": {"warmup": 1}})")), SchemaError);
  EXPECT_THROW(experiment_config_from_json(Json::parse(R"({"format": 2})")), SchemaError);
}

TEST(ExperimentConfig, RejectsNonPositiveBudgets) {
  EXPECT_THROW(experiment_config_from_json(Json::parse(R"({"smbo": {"budget": 0}})")), ConfigError);
  EXPECT_THROW(experiment_config_from_json(Json::parse(R"({"hydra": {"k": 0}})")), ConfigError);
  EXPECT_THROW(experiment_config_from_json(Json::parse(R"({"tournament": {"repetitions": 0}})")), ConfigError);
  EXPECT_THROW(experiment_config_from_json(Json::parse(R"({"smbo": {"budget": -3}})")), SchemaError);
}

TEST(ExperimentConfig, BundledDeskConfigLoads) {
  const auto c = load_experiment_config(fs::path(NEGOFORGE_SOURCE_DIR) / "configs" / "desk.json");
  EXPECT_EQ(c.train_problems, 20);
  EXPECT_EQ(c.test_problems, 10);
  EXPECT_EQ(c.hydra_k, 3u);
  EXPECT_EQ(c.tournament_repetitions, 3);
}

TEST(Stages, ConsumersReportMissingInputs) {
  const auto dir = negoforge::testing::scratch_dir("missing-inputs");
  EXPECT_THROW(stage_extract_features(tiny(dir)), ConfigError);
  EXPECT_THROW(stage_tournament(tiny(dir)), ConfigError);
}

TEST(Pipeline, ArtifactsVerifyAndRoundTrip) {
  const auto dir = negoforge::testing::scratch_dir("pipeline");
  const auto c = tiny(dir);
  const auto outcome = run_pipeline(c);
  const auto paths = artifact_paths(dir);
  for (const auto& p : {paths.roster, paths.feature_store, paths.portfolio, paths.matrix, paths.selector,
                        paths.report_md, paths.sessions_csv, paths.plot_csv, paths.tournament_json, paths.summary,
                        paths.hydra_report}) {
    EXPECT_TRUE(fs::exists(p)) << p;
  }
  EXPECT_TRUE(fs::exists(paths.history_dir / "theta1.jsonl"));
  EXPECT_TRUE(fs::exists(paths.history_dir / "theta2.jsonl"));
  const auto checks = stage_verify(c);
  for (const auto& r : checks) {
    EXPECT_TRUE(r.passed) << r.name << ": " << (r.diagnostics.empty() ? "" : r.diagnostics.front());
  }
  for (const auto& f : {paths.roster, paths.feature_store, paths.portfolio, paths.selector, paths.tournament_json}) {
    const auto doc = read_json_file(f);
    EXPECT_EQ(doc["seed"], 5u) << f;
    EXPECT_EQ(doc["tool_version"], "0.1.0") << f;
  }
  EXPECT_NE(read_text_file(paths.matrix).find("seed=5"), std::string::npos);
  EXPECT_EQ(outcome.hash, read_json_file(paths.tournament_json)["report_hash"]);
  EXPECT_EQ(outcome.selector.sessions.size(), outcome.selector.expected_sessions);
}

TEST(Pipeline, RerunGivesIdenticalArtifacts) {
  const auto a = negoforge::testing::scratch_dir("rerun-a");
  const auto b = negoforge::testing::scratch_dir("rerun-b");
  auto ca = tiny(a), cb = tiny(b);
  cb.workers = 3;
  const auto ra = run_pipeline(ca);
  const auto rb = run_pipeline(cb);
  EXPECT_EQ(ra.hash, rb.hash);
  EXPECT_EQ(digest_tree(a), digest_tree(b));
}

TEST(Pipeline, StagesDoNotMutateTheirInputs) {
  const auto dir = negoforge::testing::scratch_dir("immutable");
  const auto c = tiny(dir);
  stage_gen_problems(c);
  stage_gen_roster(c);
  const auto paths = artifact_paths(dir);
  const std::string problems = digest_tree(dir / "problems");
  const std::string roster = sha256_hex(read_text_file(paths.roster));
  stage_extract_features(c);
  const std::string features = sha256_hex(read_text_file(paths.feature_store));
  stage_hydra(c);
  const std::string matrix = sha256_hex(read_text_file(paths.matrix));
  const std::string portfolio = sha256_hex(read_text_file(paths.portfolio));
  stage_fit_selector(c);
  stage_tournament(c);
  stage_report(c);
  stage_verify(c);
  EXPECT_EQ(digest_tree(dir / "problems"), problems);
  EXPECT_EQ(sha256_hex(read_text_file(paths.roster)), roster);
  EXPECT_EQ(sha256_hex(read_text_file(paths.feature_store)), features);
  EXPECT_EQ(sha256_hex(read_text_file(paths.matrix)), matrix);
  EXPECT_EQ(sha256_hex(read_text_file(paths.portfolio)), portfolio);
}

TEST(Pipeline, ConfigureStageResumes) {
  const auto dir = negoforge::testing::scratch_dir("configure");
  auto c = tiny(dir);
  stage_gen_problems(c);
  stage_gen_roster(c);
  stage_extract_features(c);
  const auto first = stage_configure(c);
  EXPECT_LE(first.history.size(), 12u);
  c.smbo_budget = 20;
  const auto second = stage_configure(c);
  EXPECT_GT(second.history.size(), first.history.size());
  EXPECT_LE(second.history.size(), 20u);
  EXPECT_TRUE(fs::exists(artifact_paths(dir).configure_result));
}

TEST(Verify, CorruptedMatrixFailsWithCellDiagnostics) {
  const auto dir = negoforge::testing::scratch_dir("corrupt");
  const auto c = tiny(dir);
  run_pipeline(c);
  const auto matrix = artifact_paths(dir).matrix;
  std::string text = read_text_file(matrix);
  // Push the first cell out of range.
  const auto line_start = text.find("theta1,");
  const auto comma = text.find(',', text.find(',', line_start) + 1);
  const auto next = text.find(',', comma + 1);
  text.replace(comma + 1, next - comma - 1, "1.75");
  write_text_file(matrix, text);
  const auto checks = stage_verify(c);
  EXPECT_FALSE(all_passed(checks));
  bool found = false;
  for (const auto& r : checks) {
    for (const auto& d : r.diagnostics) found |= d.find("theta1") != std::string::npos;
  }
  EXPECT_TRUE(found);

  write_text_file(matrix, "theta_id,setting_id,mean_r,n_runs\ntheta1,x,abc,1\n");
  const auto broken = stage_verify(c);
  EXPECT_FALSE(all_passed(broken));
}
