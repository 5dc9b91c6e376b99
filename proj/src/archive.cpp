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

#include "icosweep/archive.hpp"

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace icosweep {

namespace {
constexpr char kMagic[4] = {'C', 'R', 'W', 'N'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void BinaryWriter::u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }

void BinaryWriter::u32(std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out_.write(b, 4);
}

void BinaryWriter::u64(std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out_.write(b, 8);
}

void BinaryWriter::f32(float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  u32(bits);
}

void BinaryWriter::f64(double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  u64(bits);
}

void BinaryWriter::bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), std::streamsize(n)); }

void BinaryReader::bytes(void* p, std::size_t n) {
  if (!in_.read(static_cast<char*>(p), std::streamsize(n))) throw ParseError("binary: unexpected end of file");
}

std::uint8_t BinaryReader::u8() {
  unsigned char b;
  bytes(&b, 1);
  return b;
}

std::uint32_t BinaryReader::u32() {
  unsigned char b[4];
  bytes(b, 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[i]) << (8 * i);
  return v;
}

std::uint64_t BinaryReader::u64() {
  unsigned char b[8];
  bytes(b, 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
  return v;
}

float BinaryReader::f32() {
  const std::uint32_t bits = u32();
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

double BinaryReader::f64() {
  const std::uint64_t bits = u64();
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

void write_archive(std::ostream& out, const std::vector<ArchiveTensor>& tensors) {
  BinaryWriter w(out);
  w.bytes(kMagic, 4);
  w.u32(kVersion);
  w.u32(std::uint32_t(tensors.size()));
  for (const auto& t : tensors) {
    if (shape_size(t.shape) != t.values.size()) throw ContractViolation("archive: shape/value mismatch for " + t.name);
    w.u32(std::uint32_t(t.name.size()));
    w.bytes(t.name.data(), t.name.size());
    w.u8(static_cast<std::uint8_t>(t.dtype));
    w.u32(std::uint32_t(t.shape.size()));
    for (auto d : t.shape) w.u64(d);
    for (double v : t.values) {
      switch (t.dtype) {
        case DType::kF32: w.f32(float(v)); break;
        case DType::kF64: w.f64(v); break;
        case DType::kU8: w.u8(std::uint8_t(v)); break;
      }
    }
  }
}

std::vector<ArchiveTensor> read_archive(std::istream& in) {
  BinaryReader r(in);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw ParseError("archive: bad magic");
  const std::uint32_t version = r.u32();
  if (version != kVersion) throw ParseError("archive: unsupported version " + std::to_string(version));
  const std::uint32_t count = r.u32();
  std::vector<ArchiveTensor> out;
  for (std::uint32_t k = 0; k < count; ++k) {
    ArchiveTensor t;
    const std::uint32_t len = r.u32();
    if (len > (1u << 16)) throw ParseError("archive: implausible name length");
    t.name.resize(len);
    r.bytes(t.name.data(), len);
    const std::uint8_t tag = r.u8();
    if (tag > 2) throw ParseError("archive: unknown dtype tag");
    t.dtype = static_cast<DType>(tag);
    const std::uint32_t rank = r.u32();
    if (rank > 8) throw ParseError("archive: implausible rank");
    for (std::uint32_t i = 0; i < rank; ++i) t.shape.push_back(std::size_t(r.u64()));
    const std::size_t n = shape_size(t.shape);
    t.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      switch (t.dtype) {
        case DType::kF32: t.values[i] = r.f32(); break;
        case DType::kF64: t.values[i] = r.f64(); break;
        case DType::kU8: t.values[i] = r.u8(); break;
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

void write_archive(const std::string& path, const std::vector<ArchiveTensor>& tensors) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_archive(out, tensors);
}

std::vector<ArchiveTensor> read_archive(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_archive(in);
}

const ArchiveTensor& find_tensor(const std::vector<ArchiveTensor>& tensors, const std::string& name) {
  for (const auto& t : tensors) {
    if (t.name == name) return t;
  }
  throw ValidationError("archive: missing tensor '" + name + "'");
}

template <class T>
ArchiveTensor to_archive(const std::string& name, const Tensor<T>& t) {
  ArchiveTensor a;
  a.name = name;
  a.dtype = std::is_same_v<T, float> ? DType::kF32 : DType::kF64;
  a.shape = t.shape();
  a.values.assign(t.values().begin(), t.values().end());
  return a;
}

template <class T>
Tensor<T> from_archive(const ArchiveTensor& a) {
  return Tensor<T>(a.shape, std::vector<T>(a.values.begin(), a.values.end()));
}

template ArchiveTensor to_archive<float>(const std::string&, const Tensor<float>&);
template ArchiveTensor to_archive<double>(const std::string&, const Tensor<double>&);
template Tensor<float> from_archive<float>(const ArchiveTensor&);
template Tensor<double> from_archive<double>(const ArchiveTensor&);

void Fnv1a::update(const void* p, std::size_t n) {
  const auto* b = static_cast<const unsigned char*>(p);
  for (std::size_t i = 0; i < n; ++i) {
    h_ ^= b[i];
    h_ *= 1099511628211ull;
  }
}

}  // namespace icosweep
