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

// Sample chunk files. Little endian throughout:
//   "QWS1" | u16 version | u32 m | u64 count | u8 flags
// then per state: m*m f64 layout values, [f64 log_g], [u8 physical].

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "qwsample/hermitian.hpp"

namespace qws {

inline constexpr char kChunkMagic[4] = {'Q', 'W', 'S', '1'};
inline constexpr std::uint16_t kChunkVersion = 1;
inline constexpr std::uint8_t kChunkHasLogG = 0x1;
inline constexpr std::uint8_t kChunkHasPhysical = 0x2;
inline constexpr std::size_t kChunkHeaderSize = 19;

struct ChunkData {
  int m = 0;
  std::uint8_t flags = 0;
  std::vector<HermitianMatrix> states;
  std::vector<double> log_g;
  std::vector<std::uint8_t> physical;
};

/// Streams states to one file; the count in the header is patched on close.
/// A writer destroyed without a successful close() deletes its file.
class ChunkWriter {
 public:
  ChunkWriter(std::string path, int m, std::uint8_t flags);
  ~ChunkWriter();
  ChunkWriter(const ChunkWriter&) = delete;
  ChunkWriter& operator=(const ChunkWriter&) = delete;

  void append(const HermitianMatrix& state, double log_g = 0.0, bool physical = true);
  void close();
  std::uint64_t count() const { return count_; }
  const std::string& path() const { return path_; }

 private:
  void check_stream();
  std::string path_;
  int m_;
  std::uint8_t flags_;
  std::uint64_t count_ = 0;
  std::ofstream out_;
  std::vector<double> buf_;
  bool closed_ = false;
};

ChunkData read_chunk(const std::string& path);
void write_chunk(const std::string& path, const ChunkData& data);

}  // namespace qws
