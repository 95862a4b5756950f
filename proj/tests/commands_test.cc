//
// Copyright 2026 The indiv_privacy Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//


#include "indiv_privacy/commands.h"

#include <filesystem>
#include <sstream>
#include <string>

#include "indiv_privacy/io_util.h"
#include "indiv_privacy/report_io.h"
#include "json.hpp"
#include "test_util.h"

namespace indiv_privacy {
namespace {

using ::indiv_privacy::testing::StatusIs;
using ::testing::HasSubstr;

std::string Dir(const std::string& name) {
  const std::string dir = ::testing::TempDir() + "/commands_test_" + name;
  std::filesystem::remove_all(dir);
  return dir;
}

RunConfig TinyConfig(const std::string& out_dir) {
  RunConfig config = DefaultRunConfig();
  config.sim.data.num_examples = 200;
  config.sim.epochs = 2;
  config.sim.seed = 7;
  config.output_dir = out_dir;
  config.release.zero_noise = true;
  return config;
}

std::string Slurp(const std::string& path) { return *ReadFile(path); }

TEST(ExitCodeTest, Mapping) {
  EXPECT_EQ(ExitCodeFor(absl::OkStatus()), kExitOk);
  EXPECT_EQ(ExitCodeFor(absl::InvalidArgumentError("")), kExitValidation);
  EXPECT_EQ(ExitCodeFor(absl::NotFoundError("")), kExitValidation);
  EXPECT_EQ(ExitCodeFor(absl::FailedPreconditionError("")), kExitValidation);
  EXPECT_EQ(ExitCodeFor(absl::InternalError("")), kExitRuntime);
}

TEST(OverridesTest, AppliesAndValidates) {
  RunConfig config = DefaultRunConfig();
  Overrides overrides;
  overrides.seed = 3;
  overrides.clipping = "individual";
  overrides.gamma = 4;
  overrides.rounding = 0.02;
  ASSERT_OK(ApplyOverrides(overrides, config));
  EXPECT_EQ(config.sim.seed, 3u);
  EXPECT_EQ(config.sim.clipping, ClippingMode::kIndividual);
  EXPECT_EQ(config.sim.norm_updates_per_epoch, 4);
  EXPECT_EQ(config.sim.rounding, 0.02);
  overrides.clipping = "median";
  EXPECT_THAT(ApplyOverrides(overrides, config),
              StatusIs(absl::StatusCode::kInvalidArgument));
  Overrides bad_delta;
  bad_delta.delta = 2.0;
  EXPECT_THAT(ApplyOverrides(bad_delta, config),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(SimulateTest, WritesFilesDeterministically) {
  const std::string a = Dir("sim_a");
  const std::string b = Dir("sim_b");
  std::ostringstream out;
  ASSERT_OK(Simulate(TinyConfig(a), false, out));
  ASSERT_OK(Simulate(TinyConfig(b), false, out));
  for (const char* file : {"trace.jsonl", "losses.csv", "report.json",
                           "analysis.json", "histogram.csv"}) {
    EXPECT_EQ(Slurp(a + "/" + file), Slurp(b + "/" + file)) << file;
  }
  EXPECT_FALSE(std::filesystem::exists(a + "/report.csv"));
  EXPECT_FALSE(std::filesystem::exists(a + "/scatter.csv"));
  EXPECT_EQ(Slurp(a + "/report.json").find("per_example"), std::string::npos);

  const std::string unsafe = Dir("sim_unsafe");
  ASSERT_OK(Simulate(TinyConfig(unsafe), true, out));
  EXPECT_TRUE(std::filesystem::exists(unsafe + "/report.csv"));
  EXPECT_TRUE(std::filesystem::exists(unsafe + "/scatter.csv"));
}

TEST(AccountTest, ReproducesSimulateOutputs) {
  const std::string sim = Dir("acct_sim");
  const std::string acct = Dir("acct_out");
  std::ostringstream out;
  ASSERT_OK(Simulate(TinyConfig(sim), true, out));
  AccountOptions options;
  options.trace_path = sim + "/trace.jsonl";
  options.losses_path = sim + "/losses.csv";
  options.out_dir = acct;
  options.unsafe_export = true;
  ASSERT_OK(Account(options, out));
  for (const char* file : {"report.json", "report.csv", "analysis.json",
                           "histogram.csv", "scatter.csv"}) {
    EXPECT_EQ(Slurp(sim + "/" + file), Slurp(acct + "/" + file)) << file;
  }
  options.trace_path = sim + "/missing.jsonl";
  EXPECT_THAT(Account(options, out), StatusIs(absl::StatusCode::kNotFound));
}

TEST(ReportTest, ExampleQueries) {
  const std::string sim = Dir("report_sim");
  std::ostringstream ignored;
  ASSERT_OK(Simulate(TinyConfig(sim), true, ignored));
  ASSERT_OK_AND_ASSIGN(LoadedReport loaded,
                       ParseReportJson(Slurp(sim + "/report.json")));

  ReportOptions from_trace;
  from_trace.trace_path = sim + "/trace.jsonl";
  from_trace.example = 5;
  std::ostringstream out;
  ASSERT_OK(Report(from_trace, out));
  const nlohmann::json j = nlohmann::json::parse(out.str());
  ASSERT_TRUE(j.contains("epsilon"));
  EXPECT_DOUBLE_EQ(j["epsilon"].get<double>(), loaded.report.epsilons[5]);

  from_trace.example = 100000;
  EXPECT_THAT(Report(from_trace, out), StatusIs(absl::StatusCode::kOutOfRange));

  const std::string safe = Dir("report_safe");
  ASSERT_OK(Simulate(TinyConfig(safe), false, ignored));
  ReportOptions from_report;
  from_report.report_path = safe + "/report.json";
  std::ostringstream summary;
  ASSERT_OK(Report(from_report, summary));
  EXPECT_THAT(summary.str(), HasSubstr("worst_case_epsilon"));
  from_report.example = 1;
  EXPECT_THAT(Report(from_report, summary),
              StatusIs(absl::StatusCode::kFailedPrecondition));
}

TEST(ReleaseTest, ZeroNoiseFromTrace) {
  const std::string sim = Dir("release_sim");
  std::ostringstream out;
  ASSERT_OK(Simulate(TinyConfig(sim), false, out));
  ReleaseOptions options;
  options.trace_path = sim + "/trace.jsonl";
  options.release.zero_noise = true;
  options.out_dir = sim;
  ASSERT_OK(Release(options, out));
  const nlohmann::json j = nlohmann::json::parse(Slurp(sim + "/release.json"));
  EXPECT_TRUE(j.dump().find("null") != std::string::npos);

  options.release.zero_noise = false;
  options.release.budget = {0.1, 1e-5};
  EXPECT_THAT(Release(options, out),
              StatusIs(absl::StatusCode::kFailedPrecondition, HasSubstr("n/4")));
}

TEST(VerifyTest, SuitesAndNegativeControl) {
  std::ostringstream out;
  bool passed = false;
  ASSERT_OK(Verify({"enumeration", 0, false}, out, passed));
  EXPECT_TRUE(passed);
  ASSERT_OK(Verify({"bucketed", 0, false}, out, passed));
  EXPECT_TRUE(passed);
  ASSERT_OK(Verify({"bucketed", 0, true}, out, passed));
  EXPECT_FALSE(passed);
  EXPECT_THAT(Verify({"everything", 0, false}, out, passed),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

}  // namespace
}  // namespace indiv_privacy
