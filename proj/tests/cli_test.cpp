#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "json.hpp"

namespace tgrpo::cli {
namespace {

namespace fs = std::filesystem;

const char* kSmallConfig = R"(schema_version = 1
[train]
updates = 3
eval_episodes = 4
eval_every = 0
hidden = 8
[task]
max_steps = 20
)";

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("tgrpo_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path path = dir_ / name;
    std::ofstream(path) << text;
    return path;
  }

  Options options(const fs::path& config, const std::string& out) {
    Options o;
    o.config = config;
    o.out = dir_ / out;
    o.serial = true;
    return o;
  }

  static std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  static std::vector<std::string> lines_starting(const std::string& text, const std::string& prefix) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
      if (line.rfind(prefix, 0) == 0) out.push_back(line);
    }
    return out;
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream log_;
};

TEST_F(CliTest, TrainWritesArtifacts) {
  const Options o = options(write_config("c.cfg", kSmallConfig), "run");
  ASSERT_EQ(run_train(o, out_, log_), kExitOk) << log_.str();
  EXPECT_FALSE(slurp(o.out / "metrics.jsonl").empty());
  EXPECT_TRUE(fs::exists(o.out / "checkpoint.bin"));
  EXPECT_TRUE(fs::exists(o.out / "config.cfg"));
  const auto summary = nlohmann::json::parse(slurp(o.out / "summary.json"));
  EXPECT_EQ(summary["updates_run"], 3);
  EXPECT_EQ(summary["final_eval"]["episodes"], 4);
}

TEST_F(CliTest, WeightViolationExitsNonzeroNamingInvariant) {
  const Options o = options(write_config("bad.cfg", R"(schema_version = 1
[train]
alpha_step = 0.5
alpha_traj = 0.6
)"),
                            "run");
  EXPECT_NE(run_train(o, out_, log_), kExitOk);
  EXPECT_NE(log_.str().find("alpha_step + alpha_traj"), std::string::npos) << log_.str();
  EXPECT_FALSE(fs::exists(o.out));
}

TEST_F(CliTest, MissingConfigLeavesNoArtifacts) {
  const Options o = options(dir_ / "absent.cfg", "run");
  EXPECT_NE(run_train(o, out_, log_), kExitOk);
  EXPECT_FALSE(fs::exists(o.out));
  EXPECT_NE(run_sweep(o, out_, log_), kExitOk);
  EXPECT_NE(run_ablation(o, out_, log_), kExitOk);
  EXPECT_FALSE(fs::exists(o.out));
}

TEST_F(CliTest, UnknownKeyIsNamed) {
  const Options o = options(write_config("c.cfg", "schema_version = 1\n[train]\nlearning_rat = 1\n"), "run");
  EXPECT_EQ(run_train(o, out_, log_), kExitBadConfig);
  EXPECT_NE(log_.str().find("train.learning_rat"), std::string::npos) << log_.str();
}

TEST_F(CliTest, EvalReadsCheckpoint) {
  const fs::path cfg = write_config("c.cfg", kSmallConfig);
  Options o = options(cfg, "run");
  ASSERT_EQ(run_train(o, out_, log_), kExitOk) << log_.str();
  Options e = options(cfg, "eval");
  e.checkpoint = o.out / "checkpoint.bin";
  e.episodes = 7;
  std::ostringstream result;
  ASSERT_EQ(run_eval(e, result, log_), kExitOk) << log_.str();
  const auto json = nlohmann::json::parse(result.str());
  EXPECT_EQ(json["episodes"], 7);
  EXPECT_EQ(json["config_digest"], json["checkpoint_config_digest"]);
  EXPECT_TRUE(fs::exists(e.out / "eval.json"));
  e.checkpoint = dir_ / "absent.bin";
  EXPECT_EQ(run_eval(e, result, log_), kExitFailure);
}

TEST_F(CliTest, AlphaSweepHasFiveAggregateRows) {
  const Options o = options(write_config("c.cfg", std::string(kSmallConfig) +
                                                      "[sweep]\naxis = alpha_step\n"
                                                      "values = 0.1, 0.3, 0.5, 0.7, 0.9\n"),
                            "sweep");
  ASSERT_EQ(run_sweep(o, out_, log_), kExitOk) << log_.str();
  const std::string csv = slurp(o.out / "sweep.csv");
  EXPECT_EQ(lines_starting(csv, "aggregate,").size(), 5u);
  EXPECT_EQ(lines_starting(csv, "cell,").size(), 5u);
  for (const std::string& row : lines_starting(csv, "cell,")) {
    EXPECT_NE(row.find(",alpha_step,"), std::string::npos);
    EXPECT_NE(row.find(",ok,"), std::string::npos);
  }
  EXPECT_TRUE(fs::exists(o.out / "sweep_timing.csv"));
  EXPECT_EQ(csv.find("wall"), std::string::npos);
}

TEST_F(CliTest, GroupSweepIsReproducible) {
  const fs::path cfg = write_config("c.cfg", std::string(kSmallConfig) +
                                                 "[sweep]\naxis = group_size\n"
                                                 "values = 2, 4, 6, 8\nrepetitions = 3\n");
  Options first = options(cfg, "a");
  ASSERT_EQ(run_sweep(first, out_, log_), kExitOk) << log_.str();
  Options second = options(cfg, "b");
  second.serial = false;
  ASSERT_EQ(run_sweep(second, out_, log_), kExitOk) << log_.str();
  const std::string csv = slurp(first.out / "sweep.csv");
  EXPECT_EQ(lines_starting(csv, "aggregate,").size(), 4u);
  EXPECT_EQ(lines_starting(csv, "cell,").size(), 12u);
  EXPECT_EQ(csv, slurp(second.out / "sweep.csv"));
}

TEST_F(CliTest, SweepNeedsAnAxis) {
  const Options o = options(write_config("c.cfg", kSmallConfig), "sweep");
  EXPECT_EQ(run_sweep(o, out_, log_), kExitBadConfig);
  EXPECT_FALSE(fs::exists(o.out));
}

TEST_F(CliTest, AblationHasThreeVariantsAndPassesInternalChecks) {
  const Options o = options(write_config("c.cfg", std::string(kSmallConfig) +
                                                      "[sweep]\nrepetitions = 2\n"),
                            "ablate");
  ASSERT_EQ(run_ablation(o, out_, log_), kExitOk) << log_.str();
  const std::string csv = slurp(o.out / "ablation.csv");
  const auto fused = lines_starting(csv, "fused,");
  const auto step = lines_starting(csv, "step_only,");
  const auto traj = lines_starting(csv, "trajectory_only,");
  ASSERT_EQ(fused.size() + step.size() + traj.size(), 3u);
  for (const auto* rows : {&fused, &step, &traj}) {
    EXPECT_NE(rows->front().find(",ok,"), std::string::npos) << rows->front();
  }
  EXPECT_NE(step.front().find("step_only,1,0,"), std::string::npos);
  EXPECT_NE(traj.front().find("trajectory_only,0,1,"), std::string::npos);
}

TEST(Csv, QuotesPerRfc4180) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_field("two\nlines"), "\"two\nlines\"");
}

}  // namespace
}  // namespace tgrpo::cli
