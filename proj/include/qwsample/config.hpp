// Copyright 2026 The qwsample Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Run configuration. INI text with sections; every key is optional and has
// a default. See README.md for the schema.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace qws {

enum class Task {
  kGenUniform,
  kGenProposal,
  kReject,
  kVerify,
  kMl,
  kAcceptanceScan,
  kSlice,
  kHistogram,
  kFwhm,
  kShiftFraction,
};

Task parse_task(const std::string& name);
const char* to_string(Task t);

struct RunConfig {
  // [run]
  Task task = Task::kGenUniform;
  std::uint64_t seed = 1;
  std::string out = "qws_out";
  int threads = 1;
  std::uint64_t N = 100000;
  std::uint64_t chunk_size = std::uint64_t{1} << 20;

  // [proposal]
  int m = 2;
  int n = 0;  // 0: take m
  double kappa = 0.0;
  double x1 = 0.0;
  double x2 = 0.0;
  std::string delta_file;  // explicit shift in the binary state layout
  std::string split = "exact";
  double log_C_offset = 0.0;

  // [target]
  std::string counts;
  std::string counts_file;
  std::string pom = "tetra";
  std::string pom_file;  // effects in the binary state layout, back to back

  // [verify]
  std::string lambda_grid = "default";  // default | dense | comma list
  std::uint64_t n_ufm = 1000000;
  int replicas = 1;

  // [histogram]
  std::string selector = "z";  // x, y, z, s, phi, or cN for basis coordinate N
  int bins = 50;
  double lo = -1.0;
  double hi = 1.0;
  std::string source = "wishart";  // wishart | uniform | proposal | target
  double z_peak = 0.0;

  // [slice]
  int directions = 8;

  // [fwhm]
  std::vector<int> qubits = {1, 2};
  std::vector<double> z_grid;  // empty: 0.05, 0.10, ..., 0.95

  // [shift]
  std::vector<double> dz_grid;  // empty: 0, 0.05, ..., 1
  std::vector<int> n_offsets = {0, 1};

  // [scan]
  std::vector<int> scan_n;
  std::vector<double> scan_kappa;
  std::vector<double> scan_x1;
  std::vector<double> scan_x2;

  /// "section.key" = value; unknown keys and malformed values throw kConfig.
  void set(const std::string& key, const std::string& value);
  void load_file(const std::string& path);
  void load_string(const std::string& text);
  /// Range and consistency checks; throws kConfig.
  void validate() const;
  int effective_n() const { return n > 0 ? n : m; }
  /// Canonical "section.key=value" listing, the basis of the config digest.
  std::map<std::string, std::string> entries() const;
};

std::vector<double> parse_double_list(const std::string& text);
std::vector<int> parse_int_list(const std::string& text);

}  // namespace qws
