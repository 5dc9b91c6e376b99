// Copyright 2026 The icosweep Authors
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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "icosweep/tensor.hpp"

namespace icosweep {

/// Little-endian primitive writer/reader shared by the binary formats.
class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}
  void u8(std::uint8_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f32(float v);
  void f64(double v);
  void bytes(const void* p, std::size_t n);

 private:
  std::ostream& out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::istream& in) : in_(in) {}
  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  float f32();
  double f64();
  void bytes(void* p, std::size_t n);

 private:
  std::istream& in_;
};

enum class DType : std::uint8_t { kF32 = 0, kF64 = 1, kU8 = 2 };

/// One named tensor of a CRWN archive. Values are kept as double in memory,
/// which represents every supported dtype exactly.
struct ArchiveTensor {
  std::string name;
  DType dtype = DType::kF32;
  Shape shape;
  std::vector<double> values;
};

/// CRWN archive: magic "CRWN", u32 version, u32 count, then per tensor
/// u32 name length, name bytes, u8 dtype, u32 rank, u64 dims, payload.
void write_archive(const std::string& path, const std::vector<ArchiveTensor>& tensors);
std::vector<ArchiveTensor> read_archive(const std::string& path);
void write_archive(std::ostream& out, const std::vector<ArchiveTensor>& tensors);
std::vector<ArchiveTensor> read_archive(std::istream& in);

/// Throws if `name` is absent.
const ArchiveTensor& find_tensor(const std::vector<ArchiveTensor>& tensors, const std::string& name);

template <class T>
ArchiveTensor to_archive(const std::string& name, const Tensor<T>& t);
template <class T>
Tensor<T> from_archive(const ArchiveTensor& a);

/// 64-bit FNV-1a.
class Fnv1a {
 public:
  void update(const void* p, std::size_t n);
  template <class V>
  void value(const V& v) {
    update(&v, sizeof(V));
  }
  std::uint64_t digest() const { return h_; }

 private:
  std::uint64_t h_ = 1469598103934665603ull;
};

}  // namespace icosweep
