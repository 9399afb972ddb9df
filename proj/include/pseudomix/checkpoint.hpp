#pragma once

#include <cstddef>
#include <string>

#include "pseudomix/model.hpp"

namespace pseudomix::nmt {

// Layout, all integers little-endian:
//   "PMX1"  u32 version  u32 tensor_count
//   per tensor: u16 name_len, name, u32 rows, u32 cols, u64 data_offset
//   data: row-major float32 per tensor, offsets relative to the data start
inline constexpr char kCheckpointMagic[4] = {'P', 'M', 'X', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_checkpoint(const ModelParameters& params);
// Throws FormatError on bad magic/version/manifest and CorruptionError
// (with the byte offset) on truncation.
ModelParameters deserialize_checkpoint(const std::string& bytes);

void checkpoint_save(const ModelParameters& params, const std::string& path);
ModelParameters checkpoint_load(const std::string& path);

// Size in bytes of the checkpoint for a given shape.
std::size_t checkpoint_size(const ModelShape& shape);

// A checkpoint plus its vocabularies, stored as <path>, <path>.src.vocab and
// <path>.tgt.vocab.
struct ModelBundle {
  ModelParameters params;
  Vocabulary source_vocab;
  Vocabulary target_vocab;
};

void save_bundle(const ModelBundle& bundle, const std::string& path);
ModelBundle load_bundle(const std::string& path);

}  // namespace pseudomix::nmt
