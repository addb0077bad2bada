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
#pragma once

// Experiment configuration: a flat "key = value" file with [sections].
//
//   # comment
//   [experiment]
//   sweep = lr
//   values = 0.001, 0.005, 0.01, 0.05, 0.1
//
// Every key has a default; unknown sections or keys are errors. Printing a
// parsed config yields the canonical form, which parses back to the same
// config and prints identically.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "ccfl/data.hpp"
#include "ccfl/error.hpp"
#include "ccfl/features.hpp"
#include "ccfl/federation.hpp"

namespace ccfl {

enum class SweepKind { kSingle, kPrivacy, kHidden, kLearningRate };

inline std::string_view SweepName(SweepKind s) {
  switch (s) {
    case SweepKind::kSingle: return "single";
    case SweepKind::kPrivacy: return "privacy";
    case SweepKind::kHidden: return "hidden";
    case SweepKind::kLearningRate: return "lr";
  }
  return "unknown";
}

// Column label of the swept parameter in the metrics CSV.
inline std::string_view SweepParamName(SweepKind s) {
  switch (s) {
    case SweepKind::kSingle: return "none";
    case SweepKind::kPrivacy: return "epsilon";
    case SweepKind::kHidden: return "hidden_units";
    case SweepKind::kLearningRate: return "learning_rate";
  }
  return "unknown";
}

inline std::vector<double> DefaultSweepGrid(SweepKind s) {
  switch (s) {
    case SweepKind::kSingle: return {0.0};
    case SweepKind::kPrivacy: return {0.5, 1, 2, 4, 8};
    case SweepKind::kHidden: return {4, 8, 16, 32, 64};
    case SweepKind::kLearningRate: return {0.001, 0.005, 0.01, 0.05, 0.1};
  }
  return {};
}

enum class DataSource { kSynthetic, kCsv };

struct ExperimentConfig {
  // [experiment]
  SweepKind sweep = SweepKind::kSingle;
  std::vector<double> values;  // empty: default grid of the sweep
  std::vector<Strategy> strategies = {Strategy::kFedAvg};
  std::vector<std::uint64_t> seeds = {1};
  std::string output = "metrics.csv";
  std::string round_log;

  // [federation]
  std::size_t nodes = 5;
  int max_rounds = 200;
  double target_accuracy = 0.85;

  // [train]
  double learning_rate = 0.05;
  int local_epochs = 1;
  std::size_t batch_size = 32;
  std::size_t hidden_units = 16;

  // [dp]
  double epsilon = 1.0;
  double delta = 1e-5;
  double clip_norm = 1.0;

  // [he]
  int he_bits = 512;
  int he_scale_bits = kDefaultHeScaleBits;

  // [smc]
  int smc_scale_bits = kDefaultSmcScaleBits;

  // [extractor]
  ExtractorKind extractor_kind = ExtractorKind::kRandomFourier;
  std::size_t extractor_output_dim = 64;
  double extractor_gamma = 1.0;
  std::uint64_t extractor_seed = 7;

  // [data]
  DataSource source = DataSource::kSynthetic;
  SyntheticKind synthetic_kind = SyntheticKind::kBlobs;
  std::size_t dim = 10;
  std::size_t samples = 2000;
  double separation = 4.0;
  double sigma = 1.0;
  std::string csv_path;
  std::string label_column = "label";
  double test_fraction = 0.2;
  PartitionKind partition = PartitionKind::kIid;
  double alpha = 0.5;

  // [topology]
  std::vector<std::string> clouds = {"cloud-a", "cloud-b", "cloud-c"};
  double link_bytes_per_ms = 125000.0;
  double link_latency_ms = 20.0;
  double intra_bytes_per_ms = 1250000.0;
  double intra_latency_ms = 0.5;

  std::vector<double> SweepValues() const {
    return values.empty() ? DefaultSweepGrid(sweep) : values;
  }

  bool operator==(const ExperimentConfig&) const = default;
};

namespace config_detail {

inline std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> SplitList(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    std::string item = Trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::string FormatReal(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

struct BadValue {
  std::string why;
};

inline double ParseReal(const std::string& s) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw BadValue{"expected a real number, got '" + s + "'"};
  }
  return v;
}

inline std::uint64_t ParseUnsigned(const std::string& s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw BadValue{"expected a non-negative integer, got '" + s + "'"};
  }
  return v;
}

inline int ParseInt(const std::string& s) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw BadValue{"expected an integer, got '" + s + "'"};
  }
  return v;
}

template <typename E>
struct EnumName {
  E value;
  std::string_view name;
};

template <typename E, std::size_t N>
E ParseEnum(const std::string& s, const EnumName<E> (&table)[N]) {
  std::string choices;
  for (const auto& e : table) {
    if (e.name == s) return e.value;
    choices += (choices.empty() ? "" : ", ") + std::string(e.name);
  }
  throw BadValue{"expected one of {" + choices + "}, got '" + s + "'"};
}

template <typename E, std::size_t N>
std::string FormatEnum(E v, const EnumName<E> (&table)[N]) {
  for (const auto& e : table) {
    if (e.value == v) return std::string(e.name);
  }
  return "?";
}

inline constexpr EnumName<SweepKind> kSweepNames[] = {{SweepKind::kSingle, "single"},
                                                      {SweepKind::kPrivacy, "privacy"},
                                                      {SweepKind::kHidden, "hidden"},
                                                      {SweepKind::kLearningRate, "lr"}};
inline constexpr EnumName<ExtractorKind> kExtractorNames[] = {
    {ExtractorKind::kRandomFourier, "random-fourier"}, {ExtractorKind::kIdentity, "identity"}};
inline constexpr EnumName<DataSource> kSourceNames[] = {{DataSource::kSynthetic, "synthetic"},
                                                        {DataSource::kCsv, "csv"}};
inline constexpr EnumName<SyntheticKind> kSyntheticNames[] = {{SyntheticKind::kBlobs, "blobs"},
                                                              {SyntheticKind::kXor, "xor"}};
inline constexpr EnumName<PartitionKind> kPartitionNames[] = {{PartitionKind::kIid, "iid"},
                                                              {PartitionKind::kDirichlet, "dirichlet"}};

struct Field {
  std::string section;
  std::string key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <typename T>
Field Real(std::string section, std::string key, T ExperimentConfig::*member) {
  return {std::move(section), std::move(key),
          [member](ExperimentConfig& c, const std::string& v) { c.*member = ParseReal(v); },
          [member](const ExperimentConfig& c) { return FormatReal(c.*member); }};
}

template <typename T>
Field Unsigned(std::string section, std::string key, T ExperimentConfig::*member) {
  return {std::move(section), std::move(key),
          [member](ExperimentConfig& c, const std::string& v) {
            const std::uint64_t u = ParseUnsigned(v);
            if (u > std::numeric_limits<T>::max()) throw BadValue{"value too large"};
            c.*member = static_cast<T>(u);
          },
          [member](const ExperimentConfig& c) { return std::to_string(c.*member); }};
}

inline Field Integer(std::string section, std::string key, int ExperimentConfig::*member) {
  return {std::move(section), std::move(key),
          [member](ExperimentConfig& c, const std::string& v) { c.*member = ParseInt(v); },
          [member](const ExperimentConfig& c) { return std::to_string(c.*member); }};
}

inline Field Text(std::string section, std::string key, std::string ExperimentConfig::*member) {
  return {std::move(section), std::move(key),
          [member](ExperimentConfig& c, const std::string& v) { c.*member = v; },
          [member](const ExperimentConfig& c) { return c.*member; }};
}

template <typename E, std::size_t N>
Field Enum(std::string section, std::string key, E ExperimentConfig::*member,
           const EnumName<E> (&table)[N]) {
  return {std::move(section), std::move(key),
          [member, &table](ExperimentConfig& c, const std::string& v) {
            c.*member = ParseEnum(v, table);
          },
          [member, &table](const ExperimentConfig& c) { return FormatEnum(c.*member, table); }};
}

template <typename T, typename Parse, typename Format>
Field List(std::string section, std::string key, std::vector<T> ExperimentConfig::*member,
           Parse parse, Format format) {
  return {std::move(section), std::move(key),
          [member, parse](ExperimentConfig& c, const std::string& v) {
            std::vector<T> out;
            for (const std::string& item : SplitList(v)) out.push_back(parse(item));
            c.*member = std::move(out);
          },
          [member, format](const ExperimentConfig& c) {
            std::string out;
            for (const T& item : c.*member) {
              if (!out.empty()) out += ", ";
              out += format(item);
            }
            return out;
          }};
}

// Canonical field order; also the print order.
inline const std::vector<Field>& Schema() {
  using C = ExperimentConfig;
  static const std::vector<Field> fields = {
      Enum("experiment", "sweep", &C::sweep, kSweepNames),
      List("experiment", "values", &C::values, ParseReal, FormatReal),
      List("experiment", "strategies", &C::strategies,
           [](const std::string& s) {
             if (auto v = ParseStrategy(s)) return *v;
             throw BadValue{"unknown strategy '" + s + "'"};
           },
           [](Strategy s) { return std::string(StrategyName(s)); }),
      List("experiment", "seeds", &C::seeds, ParseUnsigned,
           [](std::uint64_t s) { return std::to_string(s); }),
      Text("experiment", "output", &C::output),
      Text("experiment", "round_log", &C::round_log),

      Unsigned("federation", "nodes", &C::nodes),
      Integer("federation", "max_rounds", &C::max_rounds),
      Real("federation", "target_accuracy", &C::target_accuracy),

      Real("train", "learning_rate", &C::learning_rate),
      Integer("train", "local_epochs", &C::local_epochs),
      Unsigned("train", "batch_size", &C::batch_size),
      Unsigned("train", "hidden_units", &C::hidden_units),

      Real("dp", "epsilon", &C::epsilon),
      Real("dp", "delta", &C::delta),
      Real("dp", "clip_norm", &C::clip_norm),

      Integer("he", "bits", &C::he_bits),
      Integer("he", "scale_bits", &C::he_scale_bits),

      Integer("smc", "scale_bits", &C::smc_scale_bits),

      Enum("extractor", "kind", &C::extractor_kind, kExtractorNames),
      Unsigned("extractor", "output_dim", &C::extractor_output_dim),
      Real("extractor", "gamma", &C::extractor_gamma),
      Unsigned("extractor", "seed", &C::extractor_seed),

      Enum("data", "source", &C::source, kSourceNames),
      Enum("data", "kind", &C::synthetic_kind, kSyntheticNames),
      Unsigned("data", "dim", &C::dim),
      Unsigned("data", "samples", &C::samples),
      Real("data", "separation", &C::separation),
      Real("data", "sigma", &C::sigma),
      Text("data", "csv_path", &C::csv_path),
      Text("data", "label_column", &C::label_column),
      Real("data", "test_fraction", &C::test_fraction),
      Enum("data", "partition", &C::partition, kPartitionNames),
      Real("data", "alpha", &C::alpha),

      List("topology", "clouds", &C::clouds, [](const std::string& s) { return s; },
           [](const std::string& s) { return s; }),
      Real("topology", "link_bytes_per_ms", &C::link_bytes_per_ms),
      Real("topology", "link_latency_ms", &C::link_latency_ms),
      Real("topology", "intra_bytes_per_ms", &C::intra_bytes_per_ms),
      Real("topology", "intra_latency_ms", &C::intra_latency_ms),
  };
  return fields;
}

}  // namespace config_detail

// Thrown for an invalid value; names the offending key and, when known, its
// line in the file.
inline Error ConfigError(const std::string& key, std::size_t line, const std::string& why) {
  std::string where = "key '" + key + "'";
  if (line > 0) where += " (line " + std::to_string(line) + ")";
  return Error(ErrorCode::kConfig, where + ": " + why);
}

// Cross-field checks. `line_of` maps "section.key" to its line, or 0.
inline void ValidateConfig(const ExperimentConfig& c,
                           const std::function<std::size_t(const std::string&)>& line_of) {
  auto check = [&](bool ok, const std::string& key, const std::string& why) {
    if (!ok) throw ConfigError(key, line_of(key), why);
  };
  check(!c.strategies.empty(), "experiment.strategies", "must list at least one strategy");
  check(!c.seeds.empty(), "experiment.seeds", "must list at least one seed");
  check(c.sweep == SweepKind::kSingle || !c.SweepValues().empty(), "experiment.values",
        "must not be empty");
  for (double v : c.values) {
    switch (c.sweep) {
      case SweepKind::kPrivacy: check(v > 0, "experiment.values", "epsilon values must be positive"); break;
      case SweepKind::kHidden:
        check(v >= 0 && v == std::floor(v), "experiment.values",
              "hidden unit counts must be non-negative integers");
        break;
      case SweepKind::kLearningRate:
        check(v > 0 && v <= 1, "experiment.values", "learning rates must lie in (0, 1]");
        break;
      case SweepKind::kSingle: break;
    }
  }
  check(!c.output.empty(), "experiment.output", "must not be empty");
  check(c.nodes >= 1, "federation.nodes", "must be positive");
  check(c.max_rounds >= 0, "federation.max_rounds", "must be non-negative");
  check(c.target_accuracy >= 0 && c.target_accuracy <= 1, "federation.target_accuracy",
        "must lie in [0, 1]");
  check(c.learning_rate > 0 && c.learning_rate <= 1, "train.learning_rate", "must lie in (0, 1]");
  check(c.local_epochs >= 0, "train.local_epochs", "must be non-negative");
  check(c.batch_size >= 1, "train.batch_size", "must be positive");
  check(c.epsilon > 0, "dp.epsilon", "must be positive");
  check(c.delta > 0 && c.delta < 1, "dp.delta", "must lie in (0, 1)");
  check(c.clip_norm > 0, "dp.clip_norm", "must be positive");
  check(IsAllowedKeyBits(c.he_bits), "he.bits", "must be one of 256, 512, 1024, 2048");
  check(c.he_scale_bits >= 1 && c.he_scale_bits <= 62, "he.scale_bits", "must lie in [1, 62]");
  check(c.smc_scale_bits >= 1 && c.smc_scale_bits <= 40, "smc.scale_bits", "must lie in [1, 40]");
  check(c.extractor_output_dim >= 1, "extractor.output_dim", "must be positive");
  check(c.extractor_gamma > 0, "extractor.gamma", "must be positive");
  check(c.dim >= 1, "data.dim", "must be positive");
  check(c.samples >= 2, "data.samples", "must be at least 2");
  check(c.sigma >= 0, "data.sigma", "must be non-negative");
  check(c.source != DataSource::kCsv || !c.csv_path.empty(), "data.csv_path",
        "required when source = csv");
  check(!c.label_column.empty(), "data.label_column", "must not be empty");
  check(c.test_fraction > 0 && c.test_fraction < 1, "data.test_fraction", "must lie in (0, 1)");
  check(c.alpha > 0, "data.alpha", "must be positive");
  check(!c.clouds.empty(), "topology.clouds", "must list at least one cloud");
  check(c.link_bytes_per_ms > 0, "topology.link_bytes_per_ms", "must be positive");
  check(c.link_latency_ms >= 0, "topology.link_latency_ms", "must be non-negative");
  check(c.intra_bytes_per_ms > 0, "topology.intra_bytes_per_ms", "must be positive");
  check(c.intra_latency_ms >= 0, "topology.intra_latency_ms", "must be non-negative");
}

inline ExperimentConfig ParseConfig(std::istream& in) {
  using config_detail::Trim;
  const auto& schema = config_detail::Schema();
  ExperimentConfig cfg;
  std::map<std::string, std::size_t> seen;
  std::string section;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string text = Trim(line);
    if (text.empty() || text.front() == '#' || text.front() == ';') continue;
    if (text.front() == '[') {
      if (text.back() != ']') {
        throw Error(ErrorCode::kConfig, "line " + std::to_string(line_no) + ": malformed section header");
      }
      section = Trim(std::string_view(text).substr(1, text.size() - 2));
      const bool known = std::any_of(schema.begin(), schema.end(),
                                     [&](const auto& f) { return f.section == section; });
      if (!known) {
        throw Error(ErrorCode::kConfig,
                    "line " + std::to_string(line_no) + ": unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kConfig,
                  "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = Trim(std::string_view(text).substr(0, eq));
    const std::string value = Trim(std::string_view(text).substr(eq + 1));
    const std::string full = section + "." + key;
    if (section.empty()) {
      throw ConfigError(key, line_no, "appears before any [section]");
    }
    const auto it = std::find_if(schema.begin(), schema.end(), [&](const auto& f) {
      return f.section == section && f.key == key;
    });
    if (it == schema.end()) throw ConfigError(full, line_no, "unknown key");
    if (seen.count(full)) throw ConfigError(full, line_no, "duplicate key");
    seen[full] = line_no;
    try {
      it->set(cfg, value);
    } catch (const config_detail::BadValue& bad) {
      throw ConfigError(full, line_no, bad.why);
    }
  }
  ValidateConfig(cfg, [&](const std::string& key) {
    const auto f = seen.find(key);
    return f == seen.end() ? std::size_t{0} : f->second;
  });
  return cfg;
}

inline ExperimentConfig ParseConfigString(const std::string& text) {
  std::istringstream in(text);
  return ParseConfig(in);
}

inline ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  Require(in.good(), ErrorCode::kIo, "cannot open config " + path);
  return ParseConfig(in);
}

// Canonical text form with every key, in schema order.
inline std::string PrintConfig(const ExperimentConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& f : config_detail::Schema()) {
    if (f.section != section) {
      if (!section.empty()) out += '\n';
      section = f.section;
      out += "[" + section + "]\n";
    }
    const std::string value = f.get(cfg);
    out += f.key + (value.empty() ? " =" : " = " + value) + "\n";
  }
  return out;
}

}  // namespace ccfl
