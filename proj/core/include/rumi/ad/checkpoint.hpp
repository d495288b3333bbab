#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "rumi/ad/params.hpp"

namespace rumi::ad {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Binary layout, all integers and floats little-endian:
//
//   magic     8 bytes  "RUMICKPT"
//   version   u32      1
//   meta_len  u64, followed by meta_len bytes of UTF-8 metadata
//   count     u64      number of parameter records
//   record:   u32 name_len, name bytes,
//             u8 flags (bit 0 frozen, bit 1 regularized),
//             u32 rank, rank x u64 dims,
//             product(dims) x f64 values (IEEE-754 binary64)
struct NamedTensor {
  std::string name;
  Tensor value;
  bool frozen = false;
  bool regularized = false;
};

struct Checkpoint {
  std::string meta;
  std::vector<NamedTensor> tensors;
};

/// Writes to a sibling temp file and renames it into place, so a reader
/// never observes a partial file.
void save_checkpoint(const std::filesystem::path& path, const ParamStore& store,
                     const std::string& meta);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copies checkpoint values into an existing store. Every store parameter
/// must be present with an identical shape.
void restore(ParamStore& store, const Checkpoint& ckpt);

std::string encode_checkpoint(const ParamStore& store, const std::string& meta);
Checkpoint decode_checkpoint(const std::string& bytes);

}  // namespace rumi::ad
