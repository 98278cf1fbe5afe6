#pragma once

#include <string>

#include "dlinoss/model.hpp"

namespace dlinoss {

// Flat binary weight container:
//
//   bytes 0..7    magic "DLINOSSW"
//   bytes 8..11   format version (u32 LE)
//   bytes 12..19  header length H (u64 LE)
//   bytes 20..    H bytes of JSON: {"config": {...}, "tensors": [
//                   {"name": "...", "shape": [..], "offset": N, "count": N}, ...]}
//   then          all tensor payloads, little-endian fp64, in header order;
//                 offsets count doubles from the start of the payload section.
//
// The echoed config makes the file self-describing.
void save_checkpoint(const std::string& path, const ModelConfig& config, const Weights& w);

struct Checkpoint {
  ModelConfig config;
  Weights weights;
};
Checkpoint load_checkpoint(const std::string& path);

}  // namespace dlinoss
