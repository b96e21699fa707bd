// Copyright (C) 2026 The latsearch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace latsearch {

// Binary tensor container ("LTSR"). Layout, all integers little-endian:
//   magic "LTSR" | u32 version | u64 header length | header JSON (UTF-8) | u32 block count
//   per block: u32 name length | name | u8 dtype (1 = f64) | u32 rank | u64 dims[rank]
//              | row-major f64 payload
struct TensorBlock {
  std::string name;
  std::vector<std::uint64_t> dims;
  std::vector<double> data;

  std::uint64_t element_count() const;
};

struct TensorContainer {
  nlohmann::json header = nlohmann::json::object();
  std::vector<TensorBlock> blocks;

  const TensorBlock& block(const std::string& name) const;
  void add(std::string name, std::vector<std::uint64_t> dims, std::vector<double> data);
};

inline constexpr std::uint32_t kTensorFormatVersion = 1;
inline constexpr std::uint8_t kDtypeF64 = 1;

std::string encode_tensors(const TensorContainer& c);
TensorContainer decode_tensors(const std::string& bytes);

void write_tensors(const std::filesystem::path& path, const TensorContainer& c);
TensorContainer read_tensors(const std::filesystem::path& path);

// Write to a temporary sibling, then rename over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace latsearch
