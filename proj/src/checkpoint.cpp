// SPDX-License-Identifier: Apache-2.0
#include "gclgcn/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>

namespace gclgcn {

namespace {

constexpr char kMagic[4] = {'G', 'C', 'L', 'C'};

template <class T>
void put(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw ParseError("checkpoint: truncated file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void write_checkpoint(std::ostream& out, std::span<const ad::Parameter* const> tensors) {
  out.write(kMagic, 4);
  put<std::uint16_t>(out, kCheckpointVersion);
  for (const ad::Parameter* p : tensors) {
    if (p->name.size() > 0xFFFF) throw ContractError("checkpoint: name too long: " + p->name.substr(0, 32));
    put<std::uint16_t>(out, static_cast<std::uint16_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    put<std::uint8_t>(out, 2);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p->value.rows()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p->value.cols()));
    for (Eigen::Index i = 0; i < p->value.size(); ++i) put<double>(out, p->value.data()[i]);
  }
}

void write_checkpoint(const std::filesystem::path& path, std::span<const ad::Parameter* const> tensors) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_checkpoint(out, tensors);
  if (!out) throw Error("write failed: " + path.string());
}

std::vector<ad::Parameter> read_checkpoint(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw ParseError("checkpoint: bad magic");
  const auto version = get<std::uint16_t>(in);
  if (version != kCheckpointVersion) throw ParseError("checkpoint: unsupported version " + std::to_string(version));
  std::vector<ad::Parameter> out;
  // tensors run to end of file
  while (in.peek() != std::char_traits<char>::eof()) {
    const auto len = get<std::uint16_t>(in);
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw ParseError("checkpoint: truncated name");
    const auto rank = get<std::uint8_t>(in);
    std::vector<std::uint32_t> dims;
    for (std::uint8_t r = 0; r < rank; ++r) dims.push_back(get<std::uint32_t>(in));
    Eigen::Index rows = 1, cols = 1;
    if (rank == 1) {
      cols = dims[0];
    } else if (rank == 2) {
      rows = dims[0];
      cols = dims[1];
    } else if (rank != 0) {
      throw ParseError("checkpoint: unsupported rank " + std::to_string(rank) + " for " + name);
    }
    Matrix value(rows, cols);
    for (Eigen::Index i = 0; i < value.size(); ++i) value.data()[i] = get<double>(in);
    out.emplace_back(std::move(name), std::move(value));
  }
  return out;
}

std::vector<ad::Parameter> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  return read_checkpoint(in);
}

void restore(std::span<ad::Parameter* const> targets, const std::vector<ad::Parameter>& saved) {
  std::map<std::string, const ad::Parameter*> by_name;
  for (const auto& p : saved) by_name[p.name] = &p;
  for (ad::Parameter* t : targets) {
    const auto it = by_name.find(t->name);
    if (it == by_name.end()) throw MismatchError("checkpoint: missing tensor " + t->name);
    const Matrix& v = it->second->value;
    if (v.rows() != t->value.rows() || v.cols() != t->value.cols()) {
      throw MismatchError("checkpoint: shape mismatch for " + t->name);
    }
    t->value = v;
  }
}

}  // namespace gclgcn
