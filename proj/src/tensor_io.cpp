// Copyright (C) 2026 The latsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "latsearch/tensor_io.hpp"

#include "latsearch/types.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace latsearch {

namespace {

static_assert(std::endian::native == std::endian::little,
              "tensor container I/O assumes a little-endian host");

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string take(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw IoError("tensor container: truncated input");
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t TensorBlock::element_count() const {
  std::uint64_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

const TensorBlock& TensorContainer::block(const std::string& name) const {
  for (const auto& b : blocks)
    if (b.name == name) return b;
  throw IoError("tensor container: no block named '" + name + "'");
}

void TensorContainer::add(std::string name, std::vector<std::uint64_t> dims, std::vector<double> data) {
  TensorBlock b{std::move(name), std::move(dims), std::move(data)};
  if (b.element_count() != b.data.size())
    throw std::invalid_argument("tensor container: payload size does not match dims");
  blocks.push_back(std::move(b));
}

std::string encode_tensors(const TensorContainer& c) {
  std::string out = "LTSR";
  put<std::uint32_t>(out, kTensorFormatVersion);
  const std::string header = c.header.dump();
  put<std::uint64_t>(out, header.size());
  out += header;
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.blocks.size()));
  for (const auto& b : c.blocks) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(b.name.size()));
    out += b.name;
    put<std::uint8_t>(out, kDtypeF64);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(b.dims.size()));
    for (auto d : b.dims) put<std::uint64_t>(out, d);
    const auto* raw = reinterpret_cast<const char*>(b.data.data());
    out.append(raw, b.data.size() * sizeof(double));
  }
  return out;
}

TensorContainer decode_tensors(const std::string& bytes) {
  Reader r(bytes);
  if (r.take(4) != "LTSR") throw IoError("tensor container: bad magic");
  if (const auto v = r.get<std::uint32_t>(); v != kTensorFormatVersion)
    throw IoError("tensor container: unsupported version " + std::to_string(v));
  TensorContainer c;
  const auto header_len = r.get<std::uint64_t>();
  try {
    c.header = nlohmann::json::parse(r.take(header_len));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("tensor container: bad header JSON: ") + e.what());
  }
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    TensorBlock b;
    b.name = r.take(r.get<std::uint32_t>());
    if (r.get<std::uint8_t>() != kDtypeF64) throw IoError("tensor container: unsupported dtype");
    const auto rank = r.get<std::uint32_t>();
    for (std::uint32_t k = 0; k < rank; ++k) b.dims.push_back(r.get<std::uint64_t>());
    const std::string payload = r.take(b.element_count() * sizeof(double));
    b.data.resize(b.element_count());
    std::memcpy(b.data.data(), payload.data(), payload.size());
    c.blocks.push_back(std::move(b));
  }
  if (!r.done()) throw IoError("tensor container: trailing bytes");
  return c;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_tensors(const std::filesystem::path& path, const TensorContainer& c) {
  write_file_atomic(path, encode_tensors(c));
}

TensorContainer read_tensors(const std::filesystem::path& path) {
  return decode_tensors(read_file(path));
}

}  // namespace latsearch
