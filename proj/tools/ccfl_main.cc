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

// ccfl: command-line driver for federated experiments.
//
//   ccfl run          --config FILE [--round-log FILE]
//   ccfl sweep        --config FILE [--output FILE]
//   ccfl keygen       --bits N --seed S --output FILE
//   ccfl print-config --config FILE

#include <cstdint>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "ccfl/ccfl.hpp"

namespace {

int PrintConfigCommand(const std::string& path) {
  std::cout << ccfl::PrintConfig(ccfl::LoadConfig(path));
  return 0;
}

int RunCommand(const std::string& path, std::string round_log, bool print_config) {
  ccfl::ExperimentConfig cfg = ccfl::LoadConfig(path);
  if (print_config) {
    std::cout << ccfl::PrintConfig(cfg);
    return 0;
  }
  if (round_log.empty()) round_log = cfg.round_log;
  const ccfl::Strategy strategy = cfg.strategies.front();
  const double value = cfg.SweepValues().front();
  const std::uint64_t seed = cfg.seeds.front();
  ccfl::CellOutcome cell = ccfl::RunCell(cfg, strategy, value, seed);
  if (!round_log.empty()) {
    std::ostringstream log;
    ccfl::WriteRoundLog(log, cell.training.history);
    ccfl::WriteFileAtomically(round_log, log.str());
  } else {
    ccfl::WriteRoundLog(std::cout, cell.training.history);
  }
  const ccfl::MetricsRow& row = cell.row;
  std::cerr << ccfl::StrategyName(row.strategy) << " seed=" << row.seed
            << " rounds=" << cell.training.history.size()
            << " rounds_to_target=" << row.rounds_to_target
            << " final_accuracy=" << row.final_accuracy
            << " privacy_score=" << row.privacy_score << " status=" << row.status << "\n";
  return row.ok() ? 0 : 1;
}

int SweepCommand(const std::string& path, const std::string& output, bool print_config) {
  ccfl::ExperimentConfig cfg = ccfl::LoadConfig(path);
  if (!output.empty()) cfg.output = output;
  if (print_config) {
    std::cout << ccfl::PrintConfig(cfg);
    return 0;
  }
  const ccfl::SweepResult result = ccfl::RunSweep(cfg);
  std::size_t failed = 0;
  for (const auto& row : result.rows) failed += row.ok() ? 0 : 1;
  std::cerr << "wrote " << result.rows.size() << " rows to " << cfg.output;
  if (failed > 0) std::cerr << " (" << failed << " failed)";
  std::cerr << "\n";
  return result.all_ok ? 0 : 1;
}

int KeygenCommand(int bits, std::uint64_t seed, const std::string& output) {
  const ccfl::PaillierKeypair kp = ccfl::GenerateKeypair(bits, seed);
  std::ostringstream out;
  out << "# Paillier keypair, g = n + 1\n"
      << "bits = " << bits << "\n"
      << "seed = " << seed << "\n"
      << "n = " << kp.pub.n.get_str(16) << "\n"
      << "lambda = " << kp.priv.lambda.get_str(16) << "\n"
      << "mu = " << kp.priv.mu.get_str(16) << "\n";
  ccfl::WriteFileAtomically(output, out.str());
  std::cerr << "wrote " << kp.pub.bits() << "-bit key to " << output << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy-preserving cross-cloud federated learning simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string round_log;
  std::string output;
  bool print_config = false;
  int bits = 512;
  std::uint64_t seed = 1;

  auto* run = app.add_subcommand("run", "Train one federation and emit its round log");
  run->add_option("--config", config_path, "Experiment config file")->required();
  run->add_option("--round-log", round_log, "Per-round CSV log (default: stdout)");
  run->add_flag("--print-config", print_config, "Print the resolved config and exit");

  auto* sweep = app.add_subcommand("sweep", "Run a strategy x value x seed sweep to CSV");
  sweep->add_option("--config", config_path, "Experiment config file")->required();
  sweep->add_option("--output", output, "Metrics CSV path (overrides the config)");
  sweep->add_flag("--print-config", print_config, "Print the resolved config and exit");

  auto* keygen = app.add_subcommand("keygen", "Generate a Paillier keypair");
  keygen->add_option("--bits", bits, "Modulus size: 256, 512, 1024 or 2048")->required();
  keygen->add_option("--seed", seed, "Generator seed")->required();
  keygen->add_option("--output", output, "Key file to write")->required();

  auto* print = app.add_subcommand("print-config", "Print a config in canonical form");
  print->add_option("--config", config_path, "Experiment config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return RunCommand(config_path, round_log, print_config);
    if (*sweep) return SweepCommand(config_path, output, print_config);
    if (*keygen) return KeygenCommand(bits, seed, output);
    if (*print) return PrintConfigCommand(config_path);
  } catch (const ccfl::Error& e) {
    std::cerr << "ccfl: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "ccfl: unexpected failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
