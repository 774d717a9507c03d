#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "sad/nn/network.hpp"

namespace sad::nn {

// A checkpoint is a directory holding
//   manifest.txt   text: format line, network shape, key/value metadata,
//                  one "tensor <name> <rows> <cols> <byte offset>" line per
//                  tensor and the FNV-1a checksum of the payload
//   tensors.bin    float32 little-endian, column-major, tensors back to back
struct Checkpoint {
  NetworkParams<float> params;
  // Free-form metadata: encoder version, hyperparameters, run info.
  std::map<std::string, std::string> metadata;
};

void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& checkpoint);
// Throws IoError on missing files and ParseError on malformed or corrupted
// content (including checksum mismatches).
Checkpoint load_checkpoint(const std::filesystem::path& dir);

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed = 0xcbf29ce484222325ULL);

// Checksum over every tensor's raw bytes in order.
std::uint64_t params_checksum(const NetworkParams<float>& params);

}  // namespace sad::nn
