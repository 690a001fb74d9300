// Copyright 2026 The r2tk Authors
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

#include "r2tk/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

#include "r2tk/errors.hpp"

namespace r2tk {

namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) out_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void f32(float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof bits);
    u32(bits);
  }
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    out_.insert(out_.end(), c, c + n);
  }
  std::vector<unsigned char> take() { return std::move(out_); }

 private:
  std::vector<unsigned char> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<unsigned char>& in) : in_(in) {}

  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw TruncatedFileError("checkpoint truncated");
  }
  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(in_[pos_] | (in_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32() {
    const std::uint32_t bits = u32();
    float f;
    std::memcpy(&f, &bits, sizeof f);
    return f;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(in_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  in_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }
  bool at_end() const { return pos_ == in_.size(); }

 private:
  const std::vector<unsigned char>& in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<unsigned char> encode_checkpoint(const NamedTensors& tensors) {
  Writer w;
  w.bytes(kCheckpointMagic, 4);
  w.u16(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    if (name.size() > 0xffff) throw FormatError("tensor name too long: " + name);
    if (t.rank() > 0xff) throw FormatError("tensor rank too large: " + name);
    w.u16(static_cast<std::uint16_t>(name.size()));
    w.bytes(name.data(), name.size());
    w.u8(static_cast<std::uint8_t>(t.rank()));
    for (std::size_t d : t.shape()) w.u32(static_cast<std::uint32_t>(d));
    for (float v : t.data()) w.f32(v);
  }
  return w.take();
}

NamedTensors decode_checkpoint(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 4) throw TruncatedFileError("checkpoint truncated before magic");
  if (std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) {
    throw BadMagicError("checkpoint has bad magic (expected R2TK)");
  }
  Reader r(bytes);
  r.str(4);
  const std::uint16_t version = r.u16();
  if (version != kCheckpointVersion) {
    throw VersionMismatchError("checkpoint version " + std::to_string(version) +
                               " unsupported (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  const std::uint32_t count = r.u32();
  NamedTensors out;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.str(r.u16());
    const std::uint8_t rank = r.u8();
    Shape shape(rank);
    for (auto& d : shape) d = r.u32();
    const std::size_t n = shape_size(shape);
    r.need(n * 4);
    std::vector<float> data(n);
    for (float& v : data) v = r.f32();
    out.emplace_back(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  if (!r.at_end()) throw FormatError("checkpoint has trailing bytes");
  return out;
}

NamedTensors named_from_params(const Params& params) {
  NamedTensors out;
  for (const auto& [name, t] : params.named()) out.emplace_back(name, *t);
  return out;
}

Params params_from_named(NamedTensors tensors) {
  std::map<std::string, Tensor> by_name;
  std::size_t layers = 0;
  for (auto& [name, t] : tensors) {
    if (name.rfind("layer", 0) == 0) {
      const std::size_t dot = name.find('.');
      if (dot == std::string::npos) throw FormatError("bad tensor name " + name);
      layers = std::max<std::size_t>(layers, std::stoul(name.substr(5, dot - 5)) + 1);
    }
    if (!by_name.emplace(name, std::move(t)).second) {
      throw FormatError("duplicate tensor " + name);
    }
  }
  Params p;
  p.layers.resize(layers);
  for (auto& [name, slot] : p.named()) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw FormatError("checkpoint is missing tensor " + name);
    *slot = std::move(it->second);
    by_name.erase(it);
  }
  if (!by_name.empty()) throw FormatError("checkpoint has unknown tensor " + by_name.begin()->first);
  return p;
}

void save_checkpoint(const Params& params, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(named_from_params(params));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

Params load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  return params_from_named(decode_checkpoint(bytes));
}

bool params_match_config(const Params& params, const ModelConfig& config) {
  const Params reference = init_params(config, 0);
  const auto a = params.named();
  const auto b = reference.named();
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].first != b[i].first || a[i].second->shape() != b[i].second->shape()) return false;
  }
  return true;
}

}  // namespace r2tk
