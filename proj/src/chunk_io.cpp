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

#include "qwsample/chunk_io.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>

namespace qws {

namespace {
static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
void put(std::ostream& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get(std::istream& in, const std::string& path) {
  unsigned char b[sizeof(T)];
  in.read(reinterpret_cast<char*>(b), sizeof(T));
  if (!in) fail(ErrorCode::kFormat, "truncated chunk file " + path);
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

void write_header(std::ostream& out, int m, std::uint64_t count, std::uint8_t flags) {
  out.write(kChunkMagic, 4);
  put<std::uint16_t>(out, kChunkVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(m));
  put<std::uint64_t>(out, count);
  put<std::uint8_t>(out, flags);
}
}  // namespace

ChunkWriter::ChunkWriter(std::string path, int m, std::uint8_t flags)
    : path_(std::move(path)), m_(m), flags_(flags), buf_(HermitianMatrix::layout_size(m)) {
  check_dimension(m);
  require((flags & ~(kChunkHasLogG | kChunkHasPhysical)) == 0, ErrorCode::kInvalidArgument, "unknown chunk flags");
  out_.open(path_, std::ios::binary | std::ios::trunc);
  if (!out_) fail(ErrorCode::kIo, "cannot create chunk file " + path_);
  write_header(out_, m_, 0, flags_);
  check_stream();
}

ChunkWriter::~ChunkWriter() {
  if (closed_) return;
  out_.close();
  std::remove(path_.c_str());
}

void ChunkWriter::check_stream() {
  if (!out_) fail(ErrorCode::kIo, "write to chunk file " + path_ + " failed");
}

void ChunkWriter::append(const HermitianMatrix& state, double log_g, bool physical) {
  require(!closed_, ErrorCode::kIo, "append to a closed chunk");
  require(state.dim() == m_, ErrorCode::kDimensionMismatch, "state dimension differs from the chunk");
  state.to_layout(buf_);
  for (double v : buf_) put(out_, v);
  if (flags_ & kChunkHasLogG) put(out_, log_g);
  if (flags_ & kChunkHasPhysical) put<std::uint8_t>(out_, physical ? 1 : 0);
  check_stream();
  ++count_;
}

void ChunkWriter::close() {
  if (closed_) return;
  out_.seekp(10);
  put<std::uint64_t>(out_, count_);
  out_.flush();
  check_stream();
  out_.close();
  if (out_.fail()) fail(ErrorCode::kIo, "closing chunk file " + path_ + " failed");
  closed_ = true;
}

ChunkData read_chunk(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open chunk file " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kChunkMagic, 4) != 0) fail(ErrorCode::kFormat, "bad magic in " + path);
  const auto version = get<std::uint16_t>(in, path);
  if (version != kChunkVersion) fail(ErrorCode::kFormat, "unsupported chunk version " + std::to_string(version));
  ChunkData d;
  const auto m = get<std::uint32_t>(in, path);
  if (m < 1 || m > static_cast<std::uint32_t>(kMaxDim)) fail(ErrorCode::kFormat, "bad dimension in " + path);
  d.m = static_cast<int>(m);
  const auto count = get<std::uint64_t>(in, path);
  d.flags = get<std::uint8_t>(in, path);
  if (d.flags & ~(kChunkHasLogG | kChunkHasPhysical)) fail(ErrorCode::kFormat, "unknown flags in " + path);
  // guard against absurd counts before reserving
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::uint64_t>(in.tellg());
  const std::uint64_t rec = 8 * HermitianMatrix::layout_size(d.m) + ((d.flags & kChunkHasLogG) ? 8 : 0) +
                            ((d.flags & kChunkHasPhysical) ? 1 : 0);
  if (bytes != kChunkHeaderSize + count * rec) fail(ErrorCode::kFormat, "size of " + path + " does not match its header");
  in.seekg(static_cast<std::streamoff>(kChunkHeaderSize));
  std::vector<double> buf(HermitianMatrix::layout_size(d.m));
  d.states.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    for (double& v : buf) v = get<double>(in, path);
    d.states.push_back(HermitianMatrix::from_layout(d.m, buf));
    if (d.flags & kChunkHasLogG) d.log_g.push_back(get<double>(in, path));
    if (d.flags & kChunkHasPhysical) d.physical.push_back(get<std::uint8_t>(in, path));
  }
  return d;
}

void write_chunk(const std::string& path, const ChunkData& data) {
  ChunkWriter w(path, data.m, data.flags);
  for (std::size_t i = 0; i < data.states.size(); ++i)
    w.append(data.states[i], (data.flags & kChunkHasLogG) ? data.log_g.at(i) : 0.0,
             (data.flags & kChunkHasPhysical) ? data.physical.at(i) != 0 : true);
  w.close();
}

}  // namespace qws
