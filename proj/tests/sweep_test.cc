/*
 * Copyright 2026 The Crosscloud FL Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "ccfl/sweep.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"

namespace ccfl {
namespace {

ExperimentConfig Small() {
  ExperimentConfig c;
  c.nodes = 3;
  c.samples = 400;
  c.max_rounds = 10;
  c.hidden_units = 4;
  c.he_bits = 256;
  c.extractor_output_dim = 16;
  c.extractor_gamma = 0.1;
  return c;
}

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> Cells(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string cell; std::getline(in, cell, ',');) out.push_back(cell);
  return out;
}

std::string MaskWallClock(const std::vector<MetricsRow>& rows) {
  std::vector<MetricsRow> masked = rows;
  for (auto& r : masked) r.wall_millis_total = 0;
  std::ostringstream out;
  WriteMetricsCsv(out, masked);
  return out.str();
}

TEST(SweepTest, SingleRunProducesOneRow) {
  const std::vector<MetricsRow> rows = RunSweepRows(Small());
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_TRUE(rows[0].ok()) << rows[0].status;
  EXPECT_EQ(rows[0].sweep_param_name, "none");
  EXPECT_GE(rows[0].rounds_to_target, 1);
  EXPECT_GE(rows[0].final_accuracy, 0.85);
  EXPECT_GT(rows[0].comm_bytes_total, 0u);
  EXPECT_GE(rows[0].privacy_score, 0.0);
  EXPECT_LE(rows[0].privacy_score, 1.0);
}

TEST(SweepTest, CsvHasHeaderAndOneLinePerCell) {
  ExperimentConfig c = Small();
  c.sweep = SweepKind::kHidden;
  c.values = {0, 2};
  c.strategies = {Strategy::kFedAvg, Strategy::kSmcFl};
  c.seeds = {1, 2};
  c.max_rounds = 2;
  const std::vector<MetricsRow> rows = RunSweepRows(c);
  ASSERT_EQ(rows.size(), 8u);
  std::ostringstream out;
  WriteMetricsCsv(out, rows);
  const auto lines = Lines(out.str());
  ASSERT_EQ(lines.size(), 9u);
  EXPECT_EQ(lines[0],
            "strategy,sweep_param_name,sweep_param_value,seed,rounds_to_target,final_accuracy,"
            "privacy_score,membership_advantage,wall_millis_total,simulated_millis_total,"
            "comm_bytes_total,status");
  const auto first = Cells(lines[1]);
  ASSERT_EQ(first.size(), 12u);
  EXPECT_EQ(first[0], "fedavg");
  EXPECT_EQ(first[1], "hidden_units");
  EXPECT_EQ(first[2], "0");
  EXPECT_EQ(first[3], "1");
  EXPECT_EQ(first[11], "ok");
  EXPECT_EQ(Cells(lines[8])[0], "smc-fl");
  EXPECT_EQ(Cells(lines[8])[2], "2");
}

TEST(SweepTest, RepeatedRunsMatchExceptWallClock) {
  ExperimentConfig c = Small();
  c.strategies = {Strategy::kFedAvg, Strategy::kDpFl, Strategy::kSmcFl, Strategy::kHeFl,
                  Strategy::kOurs};
  c.max_rounds = 3;
  EXPECT_EQ(MaskWallClock(RunSweepRows(c)), MaskWallClock(RunSweepRows(c)));
}

TEST(SweepTest, FailedCellIsReportedInStatus) {
  ExperimentConfig c = Small();
  c.nodes = 500;  // more shards than training samples
  const std::vector<MetricsRow> rows = RunSweepRows(c);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_FALSE(rows[0].ok());
  EXPECT_EQ(rows[0].status.rfind("error: ", 0), 0u) << rows[0].status;
}

TEST(SweepTest, SmallerLearningRateNeedsMoreRounds) {
  ExperimentConfig c = Small();
  c.sweep = SweepKind::kLearningRate;
  c.values = {0.005, 0.1};
  c.max_rounds = 100;
  const std::vector<MetricsRow> rows = RunSweepRows(c);
  ASSERT_EQ(rows.size(), 2u);
  ASSERT_GE(rows[1].rounds_to_target, 1);
  const int slow = rows[0].rounds_to_target < 0 ? c.max_rounds + 1 : rows[0].rounds_to_target;
  EXPECT_GT(slow, rows[1].rounds_to_target);
}

TEST(SweepTest, RunSweepWritesOutputFile) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::path(CCFL_TEST_TMPDIR) / "sweep_out";
  fs::create_directories(dir);
  ExperimentConfig c = Small();
  c.max_rounds = 1;
  c.output = (dir / "metrics.csv").string();
  const SweepResult r = RunSweep(c);
  EXPECT_TRUE(r.all_ok);
  std::ifstream in(c.output);
  std::stringstream text;
  text << in.rdbuf();
  EXPECT_EQ(Lines(text.str()).size(), 2u);
  EXPECT_FALSE(fs::exists(c.output + ".tmp"));
}

TEST(SweepTest, RoundLogHasOneLinePerRound) {
  ExperimentConfig c = Small();
  c.target_accuracy = 1.0;
  c.max_rounds = 4;
  const CellOutcome cell = RunCell(c, Strategy::kFedAvg, 0.0, 1);
  std::ostringstream out;
  WriteRoundLog(out, cell.training.history);
  const auto lines = Lines(out.str());
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[0],
            "round_index,train_accuracy,test_accuracy,mean_local_loss,wall_millis,"
            "simulated_millis,simulated_comm_bytes");
  EXPECT_EQ(Cells(lines[4])[0], "4");
}

}  // namespace
}  // namespace ccfl
