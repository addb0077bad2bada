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

// Synthetic datasets, CSV ingestion and node partitioning.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "ccfl/error.hpp"
#include "ccfl/model.hpp"
#include "ccfl/random.hpp"

namespace ccfl {

enum class SyntheticKind { kBlobs, kXor };

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::kBlobs;
  std::size_t dim = 10;
  std::size_t samples = 2000;
  std::uint64_t seed = 0;
  // Blobs: distance between the two class means.
  double separation = 4.0;
  // Per-coordinate noise standard deviation (blobs and xor clusters).
  double sigma = 1.0;

  void Validate() const {
    Require(samples >= 2, ErrorCode::kInvalidInput, "samples must be at least 2");
    Require(dim >= 1, ErrorCode::kInvalidInput, "dim must be positive");
    Require(kind != SyntheticKind::kXor || dim >= 2, ErrorCode::kInvalidInput,
            "xor data needs dim >= 2");
    Require(std::isfinite(sigma) && sigma >= 0, ErrorCode::kInvalidInput,
            "sigma must be non-negative");
    Require(std::isfinite(separation), ErrorCode::kInvalidInput,
            "separation must be finite");
  }
};

// Blobs: class means at -/+ (separation/2)/sqrt(dim) on every coordinate,
// labels alternate before a seeded shuffle so classes differ by at most one.
// Xor: clusters at (+-1, +-1) visited round-robin, label 1 iff the two
// coordinates share a sign; extra coordinates are pure noise.
inline LabeledDataset Generate(const SyntheticSpec& spec) {
  spec.Validate();
  Rng rng(spec.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<Sample> samples;
  samples.reserve(spec.samples);
  if (spec.kind == SyntheticKind::kBlobs) {
    const double offset = 0.5 * spec.separation / std::sqrt(static_cast<double>(spec.dim));
    for (std::size_t n = 0; n < spec.samples; ++n) {
      const int label = static_cast<int>(n % 2);
      const double mean = label == 1 ? offset : -offset;
      Sample s{std::vector<double>(spec.dim), label};
      for (double& x : s.features) x = mean + spec.sigma * noise(rng);
      samples.push_back(std::move(s));
    }
  } else {
    static constexpr double kCorners[4][2] = {{1, 1}, {-1, -1}, {1, -1}, {-1, 1}};
    for (std::size_t n = 0; n < spec.samples; ++n) {
      const auto& c = kCorners[n % 4];
      Sample s{std::vector<double>(spec.dim), c[0] * c[1] > 0 ? 1 : 0};
      s.features[0] = c[0] + spec.sigma * noise(rng);
      s.features[1] = c[1] + spec.sigma * noise(rng);
      for (std::size_t i = 2; i < spec.dim; ++i) s.features[i] = spec.sigma * noise(rng);
      samples.push_back(std::move(s));
    }
  }
  std::shuffle(samples.begin(), samples.end(), rng);
  return LabeledDataset(std::move(samples));
}

// Adds `offset` to every feature coordinate (covariate shift).
inline LabeledDataset Translate(const LabeledDataset& data, double offset) {
  LabeledDataset out;
  for (const Sample& s : data) {
    Sample t = s;
    for (double& x : t.features) x += offset;
    out.Add(std::move(t));
  }
  return out;
}

struct TrainTestSplit {
  LabeledDataset train;
  LabeledDataset test;
};

// The first round(test_fraction * N) samples become the test set; the
// generators already emit samples in shuffled order.
inline TrainTestSplit SplitTrainTest(const LabeledDataset& data, double test_fraction) {
  Require(test_fraction > 0 && test_fraction < 1, ErrorCode::kInvalidInput,
          "test_fraction must lie in (0, 1)");
  const auto n_test = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(data.size())));
  Require(n_test >= 1 && n_test < data.size(), ErrorCode::kInvalidInput,
          "split leaves an empty train or test set");
  std::vector<std::size_t> test_idx(n_test), train_idx(data.size() - n_test);
  std::iota(test_idx.begin(), test_idx.end(), std::size_t{0});
  std::iota(train_idx.begin(), train_idx.end(), n_test);
  return {data.Subset(train_idx), data.Subset(test_idx)};
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline std::vector<std::string_view> SplitCsvLine(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string_view cell = line.substr(start, comma - start);
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) {
      cell.remove_suffix(1);
    }
    cells.push_back(cell);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

inline bool ParseDouble(std::string_view text, double& out) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

inline std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

inline LabeledDataset ParseCsv(std::istream& in, std::string_view label_column) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    for (auto cell : detail::SplitCsvLine(line)) header.emplace_back(cell);
    break;
  }
  // Strip a UTF-8 byte order mark.
  if (!header.empty() && header.front().rfind("\xEF\xBB\xBF", 0) == 0) {
    header.front().erase(0, 3);
  }
  Require(!header.empty(), ErrorCode::kParse, "missing header row");
  const auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end()) {
    Fail(ErrorCode::kParse, "line " + std::to_string(line_no) + ": label column '" +
                                std::string(label_column) + "' not found in header");
  }
  const auto label_idx = static_cast<std::size_t>(label_it - header.begin());

  LabeledDataset data;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = detail::SplitCsvLine(line);
    if (cells.size() != header.size()) {
      Fail(ErrorCode::kParse, "line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(header.size()) + " cells, found " +
                                  std::to_string(cells.size()));
    }
    Sample s;
    s.features.reserve(cells.size() - 1);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      if (!detail::ParseDouble(cells[c], v)) {
        Fail(ErrorCode::kParse, "line " + std::to_string(line_no) + ": column '" +
                                    header[c] + "' is not numeric: '" +
                                    std::string(cells[c]) + "'");
      }
      if (c == label_idx) {
        if (v != 0.0 && v != 1.0) {
          Fail(ErrorCode::kParse, "line " + std::to_string(line_no) +
                                      ": label must be 0 or 1, got '" +
                                      std::string(cells[c]) + "'");
        }
        s.label = static_cast<int>(v);
      } else {
        s.features.push_back(v);
      }
    }
    data.Add(std::move(s));
  }
  return data;
}

inline LabeledDataset LoadCsv(const std::string& path, std::string_view label_column) {
  std::ifstream in(path);
  Require(in.good(), ErrorCode::kIo, "cannot open " + path);
  return ParseCsv(in, label_column);
}

// Header x0..x{d-1},<label_column>; values written with 17 significant
// digits so a reload is exact.
inline void WriteCsv(std::ostream& out, const LabeledDataset& data,
                     std::string_view label_column = "label") {
  for (std::size_t i = 0; i < data.dim(); ++i) out << 'x' << i << ',';
  out << label_column << '\n';
  for (const Sample& s : data) {
    for (double x : s.features) out << detail::FormatDouble(x) << ',';
    out << s.label << '\n';
  }
}

inline void SaveCsv(const std::string& path, const LabeledDataset& data,
                    std::string_view label_column = "label") {
  std::ofstream out(path);
  Require(out.good(), ErrorCode::kIo, "cannot write " + path);
  WriteCsv(out, data, label_column);
}

// ---------------------------------------------------------------------------
// Partitioning

enum class PartitionKind { kIid, kDirichlet };

struct PartitionScheme {
  PartitionKind kind = PartitionKind::kIid;
  std::size_t shards = 1;
  double alpha = 0.5;
};

inline constexpr int kMaxPartitionRetries = 100;

// Returns, per shard, the ascending indices of the samples it owns.
inline std::vector<std::vector<std::size_t>> PartitionIndices(
    const LabeledDataset& data, const PartitionScheme& scheme, std::uint64_t seed) {
  const std::size_t k = scheme.shards;
  Require(k >= 1, ErrorCode::kInvalidInput, "shard count must be positive");
  Require(data.size() >= k, ErrorCode::kInvalidInput,
          "dataset has " + std::to_string(data.size()) + " samples for " +
              std::to_string(k) + " shards");
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> shards(k);

  if (scheme.kind == PartitionKind::kIid) {
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t base = data.size() / k;
    const std::size_t extra = data.size() % k;
    std::size_t pos = 0;
    for (std::size_t s = 0; s < k; ++s) {
      const std::size_t len = base + (s < extra ? 1 : 0);
      shards[s].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                       order.begin() + static_cast<std::ptrdiff_t>(pos + len));
      pos += len;
    }
  } else {
    Require(std::isfinite(scheme.alpha) && scheme.alpha > 0, ErrorCode::kInvalidInput,
            "dirichlet alpha must be positive");
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < data.size(); ++i) by_class[data[i].label].push_back(i);
    std::gamma_distribution<double> gamma(scheme.alpha, 1.0);
    bool ok = false;
    for (int attempt = 0; attempt < kMaxPartitionRetries && !ok; ++attempt) {
      for (auto& s : shards) s.clear();
      for (auto& members : by_class) {
        std::vector<std::size_t> cls = members;
        std::shuffle(cls.begin(), cls.end(), rng);
        std::vector<double> props(k);
        double total = 0.0;
        for (double& p : props) total += (p = gamma(rng));
        if (total <= 0.0) {
          std::fill(props.begin(), props.end(), 1.0);
          total = static_cast<double>(k);
        }
        // Cumulative cut points; the last shard takes the remainder.
        std::size_t pos = 0;
        double cum = 0.0;
        for (std::size_t s = 0; s < k; ++s) {
          cum += props[s] / total;
          std::size_t cut = s + 1 == k ? cls.size()
                                       : static_cast<std::size_t>(std::llround(
                                             cum * static_cast<double>(cls.size())));
          cut = std::clamp(cut, pos, cls.size());
          shards[s].insert(shards[s].end(), cls.begin() + static_cast<std::ptrdiff_t>(pos),
                           cls.begin() + static_cast<std::ptrdiff_t>(cut));
          pos = cut;
        }
      }
      ok = std::none_of(shards.begin(), shards.end(),
                        [](const auto& s) { return s.empty(); });
    }
    Require(ok, ErrorCode::kInvalidInput,
            "dirichlet partition left an empty shard after " +
                std::to_string(kMaxPartitionRetries) + " attempts");
  }
  for (auto& s : shards) std::sort(s.begin(), s.end());
  return shards;
}

inline std::vector<LabeledDataset> Partition(const LabeledDataset& data,
                                             const PartitionScheme& scheme,
                                             std::uint64_t seed) {
  std::vector<LabeledDataset> out;
  for (const auto& idx : PartitionIndices(data, scheme, seed)) out.push_back(data.Subset(idx));
  return out;
}

}  // namespace ccfl
