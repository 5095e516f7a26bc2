#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "prw/matrix.hpp"
#include "prw/protonet.hpp"

namespace prw {

// Versioned model container.
//
//   bytes 0..7    magic "PRWCKPT\0"
//   u32 LE        format version (1)
//   u32 LE        header length H
//   H bytes       JSON header: {"architecture": {"layers": [...],
//                 "activation": "relu"}, "tensors": [[rows, cols], ...],
//                 "config_digest": "...", "tag": "...", "episode": n,
//                 "validation_accuracy": x}
//   per tensor    u32 LE rows, u32 LE cols, rows*cols float32 LE
//
// Parameters are held at float32 precision; from_net() rounds.
struct Checkpoint {
  std::vector<std::size_t> layer_sizes;
  std::vector<Matrix> params;
  std::string config_digest;
  std::string tag;  // "prwn" or "pn-baseline"
  std::uint64_t episode = 0;
  double validation_accuracy = 0.0;

  static Checkpoint from_net(const EmbeddingNet& net);
  EmbeddingNet net() const;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view text);

}  // namespace prw
